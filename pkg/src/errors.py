class LabError(Exception):
    """Базовое исключение лаборатории"""


class InvalidArgumentError(LabError, ValueError):
    """Недопустимые входные параметры операции"""


class UnsupportedError(LabError, ValueError):
    """Операция не поддерживается для переданного объекта"""


class ResourceLimitError(LabError, RuntimeError):
    """Превышен настроенный лимит (число вершин, размер оракула)"""

    def __init__(self, message: str, cap: int) -> None:
        super().__init__(message)
        self.cap: int = cap


class KernelCollisionError(LabError, ArithmeticError):
    """Функция не определена на ядре L, а проекция на ортогональное дополнение не запрошена"""


class DivergenceError(LabError, ArithmeticError):
    """Интеграл по времени расходится (вклад ядра L)"""


class DegenerateInputError(LabError, ValueError):
    """Знаменатель отношения исчезающе мал"""


class HypothesisViolationError(LabError, ValueError):
    """Не выполнена гипотеза проверяемого утверждения"""


class NumericFailureError(LabError, ArithmeticError):
    """Численная процедура не сошлась"""
