"""Drift field construction, differentiation and radial diagnostics"""
import json
import logging
import math
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np
from pydantic import ValidationError

from ergodiff.core.errors import FieldDefinitionError
from ergodiff.models.polynomial import PolyDriftField, Polynomial
from ergodiff.models.radial import PotentialKind, RadialGradientField
from ergodiff.schemas.field import DriftSector, RadialDiagnostics

logger = logging.getLogger(__name__)

Jacobian = tuple[tuple[Polynomial, ...], ...]


def make_z4_field() -> PolyDriftField:
    """b = -(d/dz) z^4 written out: b1 = -4x1^3 + 12x1x2^2, b2 = -12x1^2x2 + 4x2^3"""
    b1 = Polynomial.from_terms(2, [(-4.0, (3, 0)), (12.0, (1, 2))])
    b2 = Polynomial.from_terms(2, [(-12.0, (2, 1)), (4.0, (0, 3))])
    return PolyDriftField(dim=2, name="z4", components=(b1, b2))


def make_holomorphic_power_field(n: int) -> PolyDriftField:
    """b1 + i b2 = -(d/dz) z^n = -n z^(n-1), expanded binomially"""
    if n < 2:
        raise ValueError(f"power must be at least 2, got {n}")
    m = n - 1
    real_terms, imag_terms = [], []
    for k in range(m + 1):
        coeff = -n * math.comb(m, k)
        powers = (m - k, k)
        # i^k cycles through 1, i, -1, -i
        if k % 2 == 0:
            real_terms.append((coeff * (-1) ** (k // 2), powers))
        else:
            imag_terms.append((coeff * (-1) ** ((k - 1) // 2), powers))
    return PolyDriftField(
        dim=2,
        name=f"holo{n}",
        components=(
            Polynomial.from_terms(2, real_terms),
            Polynomial.from_terms(2, imag_terms),
        ),
    )


def make_zero_field(dim: int = 2) -> PolyDriftField:
    return PolyDriftField(
        dim=dim, name="zero", components=tuple(Polynomial.zero(dim) for _ in range(dim))
    )


def polynomial_from_gradient(potential: Polynomial, name: str = "gradient") -> PolyDriftField:
    """b = -grad V for a polynomial potential V"""
    return PolyDriftField(
        dim=potential.dim,
        name=name,
        components=tuple(-potential.derivative(j) for j in range(potential.dim)),
    )


def make_quartic_well_field(dim: int = 2) -> PolyDriftField:
    """b = -grad(r^4) = -4 r^2 x, the polynomial member of the attractive family"""
    r2 = Polynomial.zero(dim)
    for j in range(dim):
        xj = Polynomial.variable(dim, j)
        r2 = r2 + xj * xj
    return polynomial_from_gradient(r2 * r2, name="quartic-well")


def make_gradient_power_field(
    d: int, alpha: float, sign: PotentialKind | str
) -> RadialGradientField:
    """b = -grad V for V = r^alpha (attractive) or V = -r^(-alpha) (repulsive-well)"""
    if d < 1:
        raise ValueError(f"dimension must be positive, got {d}")
    if alpha <= 0:
        raise ValueError(f"alpha must be positive, got {alpha}")
    return RadialGradientField(dim=d, alpha=alpha, kind=PotentialKind(sign))


DEFAULT_FIELDS: dict[str, Callable[[], PolyDriftField]] = {
    "z4": make_z4_field,
    "zero": make_zero_field,
    "quartic-well": make_quartic_well_field,
}


def evaluate(field, x) -> np.ndarray:
    """b(x); deterministic monomial-sum evaluation for polynomial fields"""
    return field.evaluate(x)


def jacobian(field: PolyDriftField) -> Jacobian:
    """Entry (k, j) is the exact polynomial d b_k / d x_j"""
    return tuple(
        tuple(comp.derivative(j) for j in range(field.dim)) for comp in field.components
    )


def laplacian_component(field: PolyDriftField, k: int) -> Polynomial:
    """Laplacian of b_k, with k counted from 1 as in b_1, ..., b_d"""
    if not 1 <= k <= field.dim:
        raise IndexError(f"component index {k} outside 1..{field.dim}")
    return field.components[k - 1].laplacian()


def generator_drift_terms(field: PolyDriftField) -> tuple[Polynomial, ...]:
    """L0 b_k = b . grad b_k + (1/2) Laplacian b_k for every component"""
    terms = []
    for comp in field.components:
        total = comp.laplacian().scale(0.5)
        for j in range(field.dim):
            total = total + field.components[j] * comp.derivative(j)
        terms.append(total)
    return tuple(terms)


def curl2d(field: PolyDriftField) -> Polynomial:
    """d1 b2 - d2 b1; nonzero means b is not a gradient"""
    if field.dim != 2:
        raise ValueError(f"curl2d needs a planar field, got dim {field.dim}")
    b1, b2 = field.components
    return b2.derivative(0) - b1.derivative(1)


def radial_component(field, r: float, phi: float) -> RadialDiagnostics:
    """e_r.b = (x.b(x))/r at x = (r cos phi, r sin phi)"""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    x = np.array([r * math.cos(phi), r * math.sin(phi)])
    b = field.evaluate(x)
    return RadialDiagnostics(
        radius=r, angle=phi, radial_component=float(x @ b) / r
    )


def drift_sectors(field, r: float, n_angles: int = 720) -> list[DriftSector]:
    """Split [-pi, pi) into arcs of inward and outward radial drift"""
    if r <= 0:
        raise ValueError(f"radius must be positive, got {r}")
    phi = np.linspace(-math.pi, math.pi, n_angles, endpoint=False)
    points = r * np.stack([np.cos(phi), np.sin(phi)], axis=-1)
    radial = np.einsum("ij,ij->i", points, field.evaluate(points)) / r
    sign = np.sign(radial)

    sectors: list[DriftSector] = []
    start = 0
    for i in range(1, n_angles + 1):
        if i == n_angles or sign[i] != sign[start]:
            if sign[start] != 0:
                end = phi[i] if i < n_angles else math.pi
                sectors.append(
                    DriftSector(
                        phi_start=float(phi[start]),
                        phi_end=float(end),
                        direction="inward" if sign[start] < 0 else "outward",
                    )
                )
            start = i
    return sectors


def get_bundled_path(name: str) -> Path:
    return Path(str(resources.files("ergodiff") / "data" / f"{name}.json"))


def load_field(source: str | Path) -> PolyDriftField:
    """Load a field from a JSON definition file, a bundled name or a built-in name"""
    if isinstance(source, str) and source.startswith("holo") and source[4:].isdigit():
        return make_holomorphic_power_field(int(source[4:]))
    path = Path(source)
    if not path.exists():
        bundled = get_bundled_path(str(source))
        if bundled.exists():
            path = bundled
        elif str(source) in DEFAULT_FIELDS:
            return DEFAULT_FIELDS[str(source)]()
        else:
            raise FieldDefinitionError(f"unknown field '{source}'")
    try:
        definition = json.loads(path.read_text(encoding="utf-8"))
        field = PolyDriftField.model_validate(definition)
    except (json.JSONDecodeError, ValidationError) as e:
        raise FieldDefinitionError(f"invalid field definition {path}: {e}") from e
    logger.debug("Loaded field %s (dim %d) from %s", field.name, field.dim, path)
    return field


def dump_field(field: PolyDriftField, path: Path) -> Path:
    """Write a field definition as JSON"""
    path.write_text(json.dumps(field.to_definition(), indent=2) + "\n", encoding="utf-8")
    return path
