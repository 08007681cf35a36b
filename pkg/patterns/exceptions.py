"""Иерархия ошибок библиотеки; CLI переводит их в коды выхода."""


class PatternsError(Exception):
    """Базовая ошибка"""
    exit_code = 1
    kind = 'error'


class DomainError(PatternsError, ValueError):
    """Нарушено предусловие операции"""
    exit_code = 1
    kind = 'domain'


class PrimorialOverflowError(DomainError, OverflowError):
    """Праймориал не помещается в 64-битное целое"""
    kind = 'overflow'


class EvaluationOverflowError(DomainError, OverflowError):
    """Промежуточное значение многочлена вышло за 128 бит"""
    kind = 'overflow'


class ResourceLimitError(PatternsError):
    """Превышен лимит операций, памяти или перебора"""
    exit_code = 2
    kind = 'resource'

    def __init__(self, message, *, cost=None, cap=None):
        super().__init__(message)
        self.cost = cost
        self.cap = cap


def check_cap(cost, cap, what, hint="use --mode mc or raise --op-cap"):
    """Бросает ResourceLimitError, если оценка стоимости превышает лимит."""
    if cap is not None and cost > cap:
        raise ResourceLimitError(
            f"{what}: estimated cost {cost} exceeds cap {cap}; {hint}",
            cost=cost,
            cap=cap,
        )


class MultiplicityOverflowError(ResourceLimitError, OverflowError):
    """Кратности мультимножества не помещаются в int64"""
    kind = 'overflow'
