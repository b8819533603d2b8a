from __future__ import annotations


class BenchError(Exception):
    """Base class for every error raised by the benchmark library."""


# ============================================================
# Model ingestion
# ============================================================

class BpmnParseError(BenchError, ValueError):
    pass


class MalformedXmlError(BpmnParseError):
    pass


class UnsupportedElementError(BpmnParseError):
    def __init__(self, element: str):
        super().__init__(f"Unsupported BPMN element: {element}")
        self.element = element


class DanglingReferenceError(BpmnParseError):
    def __init__(self, reference: str, flow_id: str = ""):
        where = f" (flow {flow_id})" if flow_id else ""
        super().__init__(f"Sequence flow references unknown id: {reference}{where}")
        self.reference = reference
        self.flow_id = flow_id


class DuplicateIdError(BpmnParseError):
    def __init__(self, element_id: str):
        super().__init__(f"Duplicate element id: {element_id}")
        self.element_id = element_id


# ============================================================
# Metrics
# ============================================================

class BudgetExceededError(BenchError):
    pass


class NoStartEventError(BenchError):
    pass


class EmptySampleError(BenchError, ValueError):
    pass


class EmptyInputError(BenchError, ValueError):
    pass


# ============================================================
# Harness
# ============================================================

class DatasetError(BenchError):
    pass


class MissingDescriptionError(DatasetError):
    def __init__(self, case_id: str):
        super().__init__(f"Case {case_id} has no description.txt")
        self.case_id = case_id


class NoGoldModelError(DatasetError):
    def __init__(self, case_id: str):
        super().__init__(f"Case {case_id} has no gold*.bpmn model")
        self.case_id = case_id


class GoldParseError(DatasetError):
    def __init__(self, path: str, detail: BpmnParseError):
        super().__init__(f"Gold model {path} could not be parsed: {detail}")
        self.path = path
        self.detail = detail


class ConfigError(BenchError, ValueError):
    pass


class GeneratorUnreachableError(BenchError):
    pass


class ReportIoError(BenchError, OSError):
    pass
