# BPMN Bench core library
