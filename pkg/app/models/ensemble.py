"""Pydantic models for LDPC ensembles and their compiled message-passing skeletons."""

from functools import cached_property
from typing import List, Tuple

from pydantic import BaseModel, ConfigDict, Field


class RegularEnsemble(BaseModel):
    """(d_l, d_r)-regular LDPC ensemble."""
    model_config = ConfigDict(frozen=True)

    d_l: int = Field(..., description="Variable node degree", ge=2)
    d_r: int = Field(..., description="Check node degree", ge=3)
    sc_compatible: bool = Field(True, description="Whether k = d_r/d_l is integral")

    @property
    def design_rate(self) -> float:
        return 1.0 - self.d_l / self.d_r

    @property
    def label(self) -> str:
        return f"({self.d_l},{self.d_r})"


class ScProtograph(BaseModel):
    """
    (d_l, d_r, L) spatially coupled protograph.

    L bundles of k = d_r/d_l variable nodes labelled 1..L and L + 2*d_hat check
    nodes labelled -d_hat+1..L+d_hat, with d_hat = (d_l-1)/2. Every variable of
    bundle i has one edge to each check i-d_hat..i+d_hat, so check a receives k
    sockets from each bundle within distance d_hat.
    """
    model_config = ConfigDict(frozen=True)

    d_l: int = Field(..., description="Variable node degree (odd)", ge=3)
    d_r: int = Field(..., description="Full check node degree", ge=4)
    length: int = Field(..., description="Chain length L", ge=1)

    @property
    def k(self) -> int:
        return self.d_r // self.d_l

    @property
    def d_hat(self) -> int:
        return (self.d_l - 1) // 2

    @property
    def bundles(self) -> range:
        return range(1, self.length + 1)

    @property
    def checks(self) -> range:
        return range(1 - self.d_hat, self.length + self.d_hat + 1)

    @property
    def variable_count(self) -> int:
        return self.k * self.length

    @property
    def check_count(self) -> int:
        return self.length + 2 * self.d_hat

    @property
    def is_degenerate(self) -> bool:
        """True when the design rate is not positive (very short chains)."""
        return self.check_count >= self.variable_count

    @property
    def label(self) -> str:
        return f"({self.d_l},{self.d_r},{self.length})"

    def bundle_neighbors(self, i: int) -> List[int]:
        """Checks adjacent to bundle i."""
        return list(range(i - self.d_hat, i + self.d_hat + 1))

    def check_neighbors(self, a: int) -> List[int]:
        """Bundles adjacent to check a."""
        first = max(1, a - self.d_hat)
        last = min(self.length, a + self.d_hat)
        return list(range(first, last + 1))

    def check_degree(self, a: int) -> int:
        return self.k * len(self.check_neighbors(a))


class EdgeClass(BaseModel):
    """
    One directed-edge family of a protograph.

    Every variable of `bundle` has `var_multiplicity` edges into this family and
    check `check` has `check_sockets` sockets fed by it.
    """
    model_config = ConfigDict(frozen=True)

    bundle: int
    check: int
    var_multiplicity: int = Field(..., ge=1)
    check_sockets: int = Field(..., ge=1)


class EdgeGraph(BaseModel):
    """Compiled protograph skeleton that density evolution runs on."""
    model_config = ConfigDict(frozen=True)

    label: str
    positions: Tuple[int, ...] = Field(..., description="Bundle labels in chain order")
    edges: Tuple[EdgeClass, ...]

    @cached_property
    def check_inputs(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """
        For each edge class e = (i, a): (edge index, socket count) pairs feeding
        the message a -> i, excluding the target socket.
        """
        inputs = []
        for t, target in enumerate(self.edges):
            row = []
            for j, edge in enumerate(self.edges):
                if edge.check != target.check:
                    continue
                count = edge.check_sockets - (1 if j == t else 0)
                if count > 0:
                    row.append((j, count))
            inputs.append(tuple(row))
        return tuple(inputs)

    @cached_property
    def variable_inputs(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """
        For each edge class e = (i, a): (edge index, message count) pairs feeding
        the message i -> a, excluding the edge itself.
        """
        inputs = []
        for t, target in enumerate(self.edges):
            row = []
            for j, edge in enumerate(self.edges):
                if edge.bundle != target.bundle:
                    continue
                count = edge.var_multiplicity - (1 if j == t else 0)
                if count > 0:
                    row.append((j, count))
            inputs.append(tuple(row))
        return tuple(inputs)

    @cached_property
    def position_inputs(self) -> Tuple[Tuple[Tuple[int, int], ...], ...]:
        """For each position: (edge index, multiplicity) of all incoming check messages."""
        return tuple(
            tuple(
                (j, edge.var_multiplicity)
                for j, edge in enumerate(self.edges)
                if edge.bundle == position
            )
            for position in self.positions
        )

    @property
    def population_count(self) -> int:
        return 4 * len(self.edges)
