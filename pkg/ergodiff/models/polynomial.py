"""Exact polynomial vector fields"""
from collections.abc import Iterable, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator


class Monomial(BaseModel):
    """A single term coeff * x_1^p_1 * ... * x_d^p_d"""
    model_config = ConfigDict(frozen=True)

    coeff: float
    powers: tuple[int, ...]

    @field_validator("powers")
    @classmethod
    def _non_negative(cls, powers: tuple[int, ...]) -> tuple[int, ...]:
        if any(p < 0 for p in powers):
            raise ValueError(f"exponents must be non-negative, got {powers}")
        return powers

    @property
    def degree(self) -> int:
        return sum(self.powers)


def _merge_terms(terms: Iterable[Monomial]) -> tuple[Monomial, ...]:
    merged: dict[tuple[int, ...], float] = {}
    for term in terms:
        merged[term.powers] = merged.get(term.powers, 0.0) + term.coeff
    return tuple(
        Monomial(coeff=coeff, powers=powers)
        for powers, coeff in sorted(merged.items(), reverse=True)
        if coeff != 0.0
    )


class Polynomial(BaseModel):
    """Polynomial in d variables kept in canonical (merged, sorted) form"""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(gt=0)
    terms: tuple[Monomial, ...] = ()

    @model_validator(mode="before")
    @classmethod
    def _normalize(cls, data):
        if not isinstance(data, dict):
            return data
        dim = data.get("dim")
        terms = [
            t if isinstance(t, Monomial) else Monomial.model_validate(t)
            for t in data.get("terms", ())
        ]
        if isinstance(dim, int):
            for term in terms:
                if len(term.powers) != dim:
                    raise ValueError(
                        f"monomial {term.powers} does not have {dim} exponents"
                    )
        return {**data, "terms": _merge_terms(terms)}

    @classmethod
    def zero(cls, dim: int) -> "Polynomial":
        return cls(dim=dim)

    @classmethod
    def constant(cls, dim: int, value: float) -> "Polynomial":
        return cls(dim=dim, terms=[Monomial(coeff=value, powers=(0,) * dim)])

    @classmethod
    def variable(cls, dim: int, j: int) -> "Polynomial":
        """The coordinate x_{j+1} (0-based index)"""
        powers = tuple(1 if i == j else 0 for i in range(dim))
        return cls(dim=dim, terms=[Monomial(coeff=1.0, powers=powers)])

    @classmethod
    def from_terms(
        cls, dim: int, terms: Iterable[tuple[float, Sequence[int]]]
    ) -> "Polynomial":
        return cls(
            dim=dim,
            terms=[Monomial(coeff=c, powers=tuple(p)) for c, p in terms],
        )

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def degree(self) -> int:
        return max((t.degree for t in self.terms), default=0)

    def _check_dim(self, other: "Polynomial") -> None:
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check_dim(other)
        return Polynomial(dim=self.dim, terms=self.terms + other.terms)

    def __neg__(self) -> "Polynomial":
        return self.scale(-1.0)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        return self + (-other)

    def __mul__(self, other: "Polynomial | float") -> "Polynomial":
        if not isinstance(other, Polynomial):
            return self.scale(float(other))
        self._check_dim(other)
        products = [
            Monomial(
                coeff=a.coeff * b.coeff,
                powers=tuple(p + q for p, q in zip(a.powers, b.powers)),
            )
            for a in self.terms
            for b in other.terms
        ]
        return Polynomial(dim=self.dim, terms=products)

    __rmul__ = __mul__

    def scale(self, factor: float) -> "Polynomial":
        return Polynomial(
            dim=self.dim,
            terms=[Monomial(coeff=factor * t.coeff, powers=t.powers) for t in self.terms],
        )

    def derivative(self, j: int) -> "Polynomial":
        """Partial derivative with respect to coordinate j (0-based) by the power rule"""
        if not 0 <= j < self.dim:
            raise IndexError(f"coordinate {j} out of range for dim {self.dim}")
        terms = []
        for t in self.terms:
            p = t.powers[j]
            if p == 0:
                continue
            powers = t.powers[:j] + (p - 1,) + t.powers[j + 1:]
            terms.append(Monomial(coeff=t.coeff * p, powers=powers))
        return Polynomial(dim=self.dim, terms=terms)

    def laplacian(self) -> "Polynomial":
        total = Polynomial.zero(self.dim)
        for j in range(self.dim):
            total = total + self.derivative(j).derivative(j)
        return total

    def evaluate(self, x) -> np.ndarray:
        """Evaluate at a point of shape (d,) or a batch of shape (..., d)"""
        return evaluate_many([self], x)[0]

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def __str__(self) -> str:
        if self.is_zero:
            return "0"
        parts = []
        for t in self.terms:
            factors = [
                f"x{i + 1}" if p == 1 else f"x{i + 1}^{p}"
                for i, p in enumerate(t.powers)
                if p > 0
            ]
            parts.append("*".join([repr(t.coeff)] + factors))
        return " + ".join(parts).replace("+ -", "- ")


def evaluate_many(polys: Sequence[Polynomial], x) -> list[np.ndarray]:
    """Evaluate several polynomials over one shared table of coordinate powers.

    Products are formed left to right and terms summed in canonical order, so
    results do not depend on the batch size and flip sign exactly under x -> -x
    for odd polynomials.
    """
    x = np.asarray(x, dtype=np.float64)
    if not polys:
        return []
    dim = polys[0].dim
    if x.shape[-1] != dim:
        raise ValueError(f"expected points with {dim} coordinates, got shape {x.shape}")
    top = [0] * dim
    for poly in polys:
        for t in poly.terms:
            top = [max(a, b) for a, b in zip(top, t.powers)]
    table = []
    for j in range(dim):
        col = [np.ones(x.shape[:-1])]
        for _ in range(top[j]):
            col.append(col[-1] * x[..., j])
        table.append(col)

    results = []
    for poly in polys:
        acc = np.zeros(x.shape[:-1])
        for t in poly.terms:
            value = np.full(x.shape[:-1], t.coeff)
            for j, p in enumerate(t.powers):
                if p:
                    value = value * table[j][p]
            acc = acc + value
        results.append(acc)
    return results


class PolyDriftField(BaseModel):
    """Drift vector field b with one exact polynomial per component"""
    model_config = ConfigDict(frozen=True)

    dim: int = Field(gt=0)
    name: str
    components: tuple[Polynomial, ...]

    @model_validator(mode="before")
    @classmethod
    def _coerce_components(cls, data):
        if not isinstance(data, dict):
            return data
        dim = data.get("dim")
        components = []
        for comp in data.get("components", ()):
            if isinstance(comp, Polynomial):
                components.append(comp)
            elif isinstance(comp, dict):
                components.append(Polynomial.model_validate(comp))
            else:
                components.append(Polynomial(dim=dim, terms=list(comp)))
        return {**data, "components": tuple(components)}

    @model_validator(mode="after")
    def _check_shape(self) -> "PolyDriftField":
        if len(self.components) != self.dim:
            raise ValueError(
                f"field of dim {self.dim} needs {self.dim} components, "
                f"got {len(self.components)}"
            )
        for comp in self.components:
            if comp.dim != self.dim:
                raise ValueError(f"component of dim {comp.dim} in a dim {self.dim} field")
        return self

    @property
    def degree(self) -> int:
        return max(c.degree for c in self.components)

    def evaluate(self, x) -> np.ndarray:
        """b(x) for x of shape (d,) or (..., d)"""
        return np.stack(evaluate_many(self.components, x), axis=-1)

    def __call__(self, x) -> np.ndarray:
        return self.evaluate(x)

    def to_definition(self) -> dict:
        """JSON-ready definition: {"dim", "components": [[{coeff, powers}]], "name"}"""
        return {
            "dim": self.dim,
            "components": [
                [{"coeff": t.coeff, "powers": list(t.powers)} for t in comp.terms]
                for comp in self.components
            ],
            "name": self.name,
        }
