"""Exception types shared across the package."""

from __future__ import annotations


class BudgetExceededError(ValueError):
    """Raised when a requested object is larger than the configured budget."""


class RouteDisagreementError(ArithmeticError):
    """Two independent computation routes for the same quantity disagree.

    This always signals an implementation bug (or a wrong formula), never a
    user error, so it is deliberately not a ``ValueError``.
    """

    def __init__(self, quantity: str, a: float, b: float, rel_tol: float):
        self.quantity = quantity
        self.values = (a, b)
        self.rel_tol = rel_tol
        super().__init__(
            f"{quantity}: routes disagree ({a!r} vs {b!r}, rel tol {rel_tol:g})"
        )


def check_agreement(quantity: str, a: float, b: float, rel_tol: float) -> None:
    scale = max(abs(a), abs(b))
    if abs(a - b) > rel_tol * scale:
        raise RouteDisagreementError(quantity, a, b, rel_tol)
