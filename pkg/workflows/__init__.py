# BPMN Bench workflows
