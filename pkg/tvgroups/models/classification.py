"""Classification verdict and report models."""

from enum import StrEnum

from pydantic import BaseModel, ConfigDict, Field


class GroupKind(StrEnum):
    """Isomorphism classes the classifier can report."""

    TRIVIAL = "Trivial"
    ELEMENTARY_ABELIAN = "ElementaryAbelian"
    FREE_ABELIAN = "FreeAbelian"
    NON_ABELIAN = "NonAbelian"
    UNKNOWN = "Unknown"


class GroupType(BaseModel):
    """
    Classification verdict.

    ElementaryAbelian ranks are exact. FreeAbelian ranks are certified only up to
    the order bound 2^max_exp (torsion-freeness) and the relation bound K.
    """

    model_config = ConfigDict(frozen=True)

    kind: GroupKind = Field(description="Verdict tag")
    rank: int | None = Field(default=None, ge=0, description="Rank for abelian verdicts")
    bound: int | None = Field(default=None, description="Relation search bound K")
    max_exp: int | None = Field(default=None, description="Order search bound exponent")
    detail: str | None = Field(default=None, description="Diagnostics for Unknown verdicts")

    @property
    def signature(self) -> str:
        """Verdict without bounds, e.g. `FreeAbelian(1)`; used to deduplicate reports."""
        if self.kind in {GroupKind.ELEMENTARY_ABELIAN, GroupKind.FREE_ABELIAN}:
            return f"{self.kind.value}({self.rank})"
        return self.kind.value

    def __str__(self) -> str:
        if self.kind == GroupKind.FREE_ABELIAN:
            return f"FreeAbelian({self.rank}, K={self.bound})"
        if self.kind == GroupKind.UNKNOWN:
            return f"Unknown(max_exp={self.max_exp}, K={self.bound})"
        return self.signature


class ClassificationRow(BaseModel):
    """One row of the enumeration report."""

    index: int = Field(ge=0, description="Position in the enumeration order")
    delta: str = Field(description="Transition table digits, row-major by state then letter")
    rho: str = Field(description="Labeling digits, row-major by state then letter")
    abelian: bool = Field(description="Whether all generator pairs commute")
    verdict: GroupKind = Field(description="Verdict tag")
    rank: int | None = Field(default=None, description="Rank for abelian verdicts")
    bound: int | None = Field(default=None, description="Relation bound K for FreeAbelian")
    signature: str = Field(description="Verdict without bounds", exclude=True)


REPORT_COLUMNS = ("index", "delta", "rho", "abelian", "verdict", "rank", "bound")


class VerdictSummary(BaseModel):
    """Verdict counts over a batch, keyed by signature in sorted order."""

    automata: int = Field(ge=0, description="Number of automata classified")
    counts: dict[str, int] = Field(default_factory=dict, description="Verdict signature counts")

    @property
    def abelian_signatures(self) -> set[str]:
        return {
            signature
            for signature in self.counts
            if not signature.startswith((GroupKind.NON_ABELIAN.value, GroupKind.UNKNOWN.value))
        }
