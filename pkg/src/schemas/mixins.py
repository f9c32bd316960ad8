from typing import ClassVar
from typing import List
from typing import Optional

from pydantic import field_validator


class ExponentValidationMixin:
    """Класс для проверки показателей Лебега p (и списков показателей)"""

    MIN_EXPONENT: ClassVar[float] = 1.0

    @field_validator("p", "q", check_fields=False)
    @classmethod
    def validate_exponent(cls, p: Optional[float]) -> Optional[float]:
        if p is not None and not p > cls.MIN_EXPONENT:
            raise ValueError(f"exponent must exceed {cls.MIN_EXPONENT}, got {p}")
        return p

    @field_validator("exponents", check_fields=False)
    @classmethod
    def validate_exponents(cls, exponents: List[float]) -> List[float]:
        if not exponents:
            raise ValueError("at least one exponent is required")
        for p in exponents:
            if not p > cls.MIN_EXPONENT:
                raise ValueError(f"exponent must exceed {cls.MIN_EXPONENT}, got {p}")
        return exponents


class RunValidationMixin:
    """Класс для проверки параметров запуска: зерно, бюджет, размеры"""

    MAX_SEED: ClassVar[int] = 2**63 - 1
    MIN_BUDGET: ClassVar[int] = 1
    MIN_SIZE: ClassVar[int] = 2

    @field_validator("seed", check_fields=False)
    @classmethod
    def validate_seed(cls, seed: int) -> int:
        if seed < 0 or seed > cls.MAX_SEED:
            raise ValueError("seed must be a nonnegative 63-bit integer")
        return seed

    @field_validator("budget", "trials", "k_max", check_fields=False)
    @classmethod
    def validate_budget(cls, budget: int) -> int:
        if budget < cls.MIN_BUDGET:
            raise ValueError(f"must be at least {cls.MIN_BUDGET}, got {budget}")
        return budget

    @field_validator("sizes", check_fields=False)
    @classmethod
    def validate_sizes(cls, sizes: Optional[List[int]]) -> Optional[List[int]]:
        if sizes is not None:
            if not sizes:
                raise ValueError("size list must be nonempty")
            if any(size < cls.MIN_SIZE for size in sizes):
                raise ValueError(f"every size must be at least {cls.MIN_SIZE}")
        return sizes
