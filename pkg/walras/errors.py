"""
Errors Module - Иерархия исключений пакета walras

- WalrasError: базовый класс
- InstanceError / CapExceededError / MonotonicityError: некорректные входные данные
- PreconditionError: нарушено предусловие операции
- PremiseError: операции нужна gross substitute посылка
- NoEquilibriumError: пустое множество Walrasian цен
- ContractViolation: политика аукциона вышла за ED/DD
"""

from typing import Any, Dict, Optional, Tuple


class WalrasError(Exception):
    """Base class for every error raised by the package."""


class InstanceError(WalrasError, ValueError):
    """Malformed valuation, instance or instance document."""


class CapExceededError(InstanceError):
    """Item or bidder count beyond the supported caps."""


class MonotonicityError(InstanceError):
    """A table valuation assigns more to a set than to one of its supersets."""

    def __init__(self, subset: int, superset: int, message: Optional[str] = None):
        self.subset = subset
        self.superset = superset
        super().__init__(
            message or f"monotonicity violated: v({subset:#b}) > v({superset:#b})"
        )

    @property
    def witness(self) -> Tuple[int, int]:
        return self.subset, self.superset


class PreconditionError(WalrasError, ValueError):
    """Operation called outside its documented precondition."""


class PremiseError(WalrasError):
    """Operation requires every bidder to be monotone gross substitute."""

    def __init__(self, message: str, bidder: Optional[int] = None, witness: Any = None):
        super().__init__(message)
        self.bidder = bidder
        self.witness = witness


class NoEquilibriumError(WalrasError):
    """No Walrasian price vector exists on the grid."""


class ContractViolation(WalrasError):
    """An auction policy selected a set outside ED(p) (resp. DD(p))."""

    def __init__(self, message: str, round_index: int, price: Tuple[int, ...], chosen: int):
        super().__init__(message)
        self.round_index = round_index
        self.price = price
        self.chosen = chosen

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": "contract_violation",
            "message": str(self),
            "round": self.round_index,
            "price": list(self.price),
            "set": self.chosen,
        }
