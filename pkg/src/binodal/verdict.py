"""Outcome of a polyconvexity test."""
from dataclasses import dataclass
import enum
from typing import Optional


class PcxStatus(enum.Enum):
    POLYCONVEX = "Polyconvex"
    NOT_POLYCONVEX = "NotPolyconvex"
    INDETERMINATE = "Indeterminate"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PcxVerdict:
    """``m_star`` is the candidate null-Lagrangian constant.

    For NotPolyconvex, ``witness_delta`` is the determinant value exhibiting
    failure and ``gap`` the (negative) value of the test function there.
    For Polyconvex, ``gap`` is the margin by which the certificate holds.
    """

    status: PcxStatus
    m_star: float
    witness_delta: Optional[float] = None
    gap: float = 0.0

    @property
    def is_polyconvex(self):
        return self.status is PcxStatus.POLYCONVEX
