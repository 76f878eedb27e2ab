"""POVM class commuting with the interaction, and its two parametrizations.

Each outcome mu of a measurement on qubit A is implemented by a Kraus
operator

    M_A(mu) = exp(i delta) * (m + exp(i alpha) * l * sigma_A^x)

with real m, l and phases alpha, delta.  Completeness requires
sum(m^2 + l^2) = 1 and sum(m l cos alpha) = 0.  The positive operator of
outcome mu is

    Pi_A(mu) = p + q * sigma_A^x,    p = m^2 + l^2,    q = 2 m l cos alpha,

so a measurement is equally well described by outcome weights (p, q) with
sum(p) = 1, sum(q) = 0 and p >= |q|.  The canonical inverse map used when a
measurement is given by weights alone is

    m = (sqrt(p + q) + sqrt(p - q)) / 2
    l = (sqrt(p + q) - sqrt(p - q)) / 2
    alpha = delta = 0.

Every such Kraus operator commutes with the x-x coupling, which is what
makes the post-measurement state carry no interaction energy.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import qmath

WEIGHT_TOL = 1e-10
DEGENERATE_PROB = 1e-14


class ConstraintViolation(ValueError):
    """A measurement description breaks one of the POVM constraints.

    ``kind`` is one of ``"normalization"`` (sum of p differs from 1),
    ``"balance"`` (sum of q differs from 0, or a q exceeds its p), or
    ``"completeness"`` (the Kraus operators do not sum to the identity
    numerically).  ``residual`` is the offending magnitude.
    """

    def __init__(self, kind: str, residual: float, detail: str = ""):
        self.kind = kind
        self.residual = residual
        msg = f"{kind} constraint violated (residual {residual:.3e})"
        if detail:
            msg += ": " + detail
        super().__init__(msg)


class NotNormalized(ValueError):
    """A state vector passed where a unit-norm ket is required."""


@dataclass(frozen=True)
class KrausCoefficients:
    """One outcome's operator coefficients (m, l, alpha, delta)."""

    m: float
    l: float
    alpha: float = 0.0
    delta: float = 0.0

    @property
    def p(self) -> float:
        return self.m * self.m + self.l * self.l

    @property
    def q(self) -> float:
        return 2.0 * self.m * self.l * math.cos(self.alpha)


@dataclass(frozen=True)
class OutcomeWeights:
    """One outcome's positive-operator weights (p, q) with p >= |q| >= 0."""

    p: float
    q: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ConstraintViolation("balance", math.inf, "weights must be finite")
        if self.p < -1e-12:
            raise ConstraintViolation("balance", -self.p, "p must be nonnegative")
        if abs(self.q) > self.p + 1e-12:
            raise ConstraintViolation(
                "balance", abs(self.q) - self.p, "|q| may not exceed p"
            )


@dataclass(frozen=True)
class MeasurementModel:
    """A finite list of outcomes; the coefficients are the stored truth.

    The weight view is derived on access, so the two parametrizations can
    never drift apart.  Scalar constraints (normalization and balance) are
    enforced at construction; the operator-level checks live in
    :func:`validate`.
    """

    coeffs: tuple[KrausCoefficients, ...]

    def __post_init__(self) -> None:
        if len(self.coeffs) == 0:
            raise ConstraintViolation("normalization", 1.0, "no outcomes")
        norm_residual = abs(sum(c.p for c in self.coeffs) - 1.0)
        if norm_residual > WEIGHT_TOL:
            raise ConstraintViolation("normalization", norm_residual)
        balance_residual = abs(sum(c.m * c.l * math.cos(c.alpha) for c in self.coeffs))
        if balance_residual > WEIGHT_TOL:
            raise ConstraintViolation("balance", balance_residual)

    @property
    def n_outcomes(self) -> int:
        return len(self.coeffs)

    @property
    def weights(self) -> tuple[OutcomeWeights, ...]:
        return tuple(OutcomeWeights(c.p, c.q) for c in self.coeffs)

    @classmethod
    def from_weights(cls, weights) -> "MeasurementModel":
        return cls(tuple(_coeffs_from_weight(w) for w in weights))


@dataclass(frozen=True)
class MeasurementOutcome:
    """Result of applying one Kraus operator: Born probability and post state.

    ``state`` is None for a degenerate outcome (probability below 1e-14),
    which is reported with probability 0.0 rather than raising.
    """

    probability: float
    state: np.ndarray | None


def _coeffs_from_weight(w: OutcomeWeights) -> KrausCoefficients:
    """Canonical Kraus coefficients for one outcome's weights (alpha = delta = 0)."""
    root_plus = math.sqrt(max(w.p + w.q, 0.0))
    root_minus = math.sqrt(max(w.p - w.q, 0.0))
    return KrausCoefficients(
        m=0.5 * (root_plus + root_minus), l=0.5 * (root_plus - root_minus)
    )


def weights_to_coeffs(weights) -> MeasurementModel:
    """Model realizing the given weights canonically; validates and round-trips.

    Raises ``ConstraintViolation`` if the weights are not a valid POVM
    description (sum p = 1, sum q = 0, p >= |q|).
    """
    return validate(_coeffs_from_weight(OutcomeWeights(w.p, w.q)) for w in weights)


def _kraus_matrix(c: KrausCoefficients) -> np.ndarray:
    m2 = c.m * qmath.identity(2) + c.l * np.exp(1j * c.alpha) * qmath.pauli("x")
    return np.exp(1j * c.delta) * qmath.tensor(m2, qmath.identity(2))


def kraus_on_full_space(model: MeasurementModel, mu: int) -> np.ndarray:
    """The 4x4 operator M_A(mu) acting on qubit A tensored with identity on B.

    Raises ``IndexError`` if ``mu`` is out of range.
    """
    if not -len(model.coeffs) <= mu < len(model.coeffs):
        raise IndexError(
            f"outcome index {mu} out of range for {len(model.coeffs)} outcomes"
        )
    return _kraus_matrix(model.coeffs[mu])


def positive_operator(c: KrausCoefficients) -> np.ndarray:
    """Pi_A(mu) = M^dag M = p + q sigma_A^x on the full space."""
    return c.p * qmath.identity(4) + c.q * qmath.tensor(
        qmath.pauli("x"), qmath.identity(2)
    )


def constraint_residuals(model: MeasurementModel) -> dict[str, float]:
    """All four POVM constraint residuals, without judging them.

    The commutation check uses the bare coupling operator
    sigma_A^x sigma_B^x; constants and the coupling strength cannot
    affect it.
    """
    norm_residual = abs(sum(c.p for c in model.coeffs) - 1.0)
    balance_residual = abs(
        sum(c.m * c.l * math.cos(c.alpha) for c in model.coeffs)
    )
    total = np.zeros((4, 4), dtype=complex)
    xx = qmath.tensor(qmath.pauli("x"), qmath.pauli("x"))
    commutant_residual = 0.0
    for c in model.coeffs:
        m4 = _kraus_matrix(c)
        total += qmath.dagger(m4) @ m4
        commutant_residual = max(
            commutant_residual, float(np.max(np.abs(m4 @ xx - xx @ m4)))
        )
    completeness_residual = float(np.max(np.abs(total - qmath.identity(4))))
    return {
        "normalization": norm_residual,
        "balance": balance_residual,
        "completeness": completeness_residual,
        "commutant": commutant_residual,
    }


def validate(coeffs, tol: float = WEIGHT_TOL) -> MeasurementModel:
    """Build a model from Kraus coefficients and check every POVM constraint.

    ``coeffs`` is an iterable of ``KrausCoefficients`` (or an existing
    ``MeasurementModel``, which is re-checked).  Beyond the scalar
    constraints, this verifies numerically that the operators sum to the
    identity and commute with the coupling.  Raises ``ConstraintViolation``
    with the offending residual.
    """
    if isinstance(coeffs, MeasurementModel):
        model = coeffs
    else:
        model = MeasurementModel(tuple(coeffs))
    residuals = constraint_residuals(model)
    for kind in ("normalization", "balance", "completeness"):
        if residuals[kind] > tol:
            raise ConstraintViolation(kind, residuals[kind])
    if residuals["commutant"] > tol:
        raise ConstraintViolation(
            "completeness",
            residuals["commutant"],
            "operator fails to commute with the coupling",
        )
    return model


def measure(model: MeasurementModel, state: np.ndarray) -> list[MeasurementOutcome]:
    """Apply every Kraus operator to a unit ket; Born probabilities and posts.

    Post-measurement states are normalized kets.  Outcomes with probability
    below 1e-14 come back with probability 0.0 and state None.
    """
    state = np.asarray(state, dtype=complex)
    if abs(qmath.norm(state) - 1.0) > 1e-10:
        raise NotNormalized(f"state norm is {qmath.norm(state)!r}, expected 1")
    outcomes = []
    for c in model.coeffs:
        phi = _kraus_matrix(c) @ state
        prob = float(np.real(phi.conj() @ phi))
        if prob < DEGENERATE_PROB:
            outcomes.append(MeasurementOutcome(probability=0.0, state=None))
        else:
            outcomes.append(
                MeasurementOutcome(probability=prob, state=phi / math.sqrt(prob))
            )
    return outcomes


def input_energy_closed(model: MeasurementModel, params) -> float:
    """Energy deposited by the measurement on the ground state: (2 h^2 / eps) sum(l^2)."""
    total_l2 = sum(c.l * c.l for c in model.coeffs)
    return 2.0 * params.h * params.h / params.eps * total_l2


def balance_weights(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Shift raw draws u so the balanced weights q = clip(u - s, -1, 1) * p sum to zero.

    The residual R(s) = sum(clip(u - s, -1, 1) * p) is continuous and
    nonincreasing with R(-2) = 1 and R(2) = -1, so bisection pins the root.
    """
    lo, hi = -2.0, 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        residual = float(np.sum(np.clip(u - mid, -1.0, 1.0) * p))
        if residual > 0.0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-16 and abs(residual) < 1e-15:
            break
    s = 0.5 * (lo + hi)
    return np.clip(u - s, -1.0, 1.0) * p


def random_measurement(seed, n_outcomes: int = 2) -> MeasurementModel:
    """Draw a valid measurement uniformly-ish: Dirichlet p, balanced bounded q.

    ``seed`` may be an integer or a ``numpy.random.Generator``.  Requires
    ``n_outcomes >= 2`` (a single outcome admits only the identity).
    """
    if n_outcomes < 2:
        raise ValueError(f"need at least 2 outcomes, got {n_outcomes}")
    rng = np.random.default_rng(seed) if not isinstance(seed, np.random.Generator) else seed
    p = rng.dirichlet(np.ones(n_outcomes))
    u = rng.uniform(-1.0, 1.0, size=n_outcomes)
    q = balance_weights(p, u)
    return weights_to_coeffs(
        OutcomeWeights(float(pi), float(qi)) for pi, qi in zip(p, q)
    )


def projective_pair() -> MeasurementModel:
    """The two sigma_A^x eigenprojectors: weights (1/2, +1/2) and (1/2, -1/2)."""
    return MeasurementModel.from_weights(
        [OutcomeWeights(0.5, 0.5), OutcomeWeights(0.5, -0.5)]
    )


def weak_pair(u: float) -> MeasurementModel:
    """Two outcomes with p = 1/2 each and q = ±u/2; u in [0, 1]."""
    if not 0.0 <= u <= 1.0:
        raise ValueError(f"weak-measurement strength must lie in [0, 1], got {u}")
    return MeasurementModel.from_weights(
        [OutcomeWeights(0.5, 0.5 * u), OutcomeWeights(0.5, -0.5 * u)]
    )


def identity_measurement() -> MeasurementModel:
    """The trivial single-outcome measurement (no disturbance, no information)."""
    return MeasurementModel((KrausCoefficients(m=1.0, l=0.0),))


def to_json_obj(model: MeasurementModel) -> dict:
    """JSON-ready description using the coefficient parametrization."""
    return {
        "outcomes": [
            {"m": c.m, "l": c.l, "alpha": c.alpha, "delta": c.delta}
            for c in model.coeffs
        ]
    }


def from_json_obj(obj: dict) -> MeasurementModel:
    """Parse a measurement from a JSON object.

    Exactly one of two keys must be present: ``"outcomes"`` (a list of
    ``{"m", "l", "alpha", "delta"}``, phases optional) or ``"weights"``
    (a list of ``{"p", "q"}``, converted by the canonical inverse map).
    """
    if not isinstance(obj, dict):
        raise ValueError("measurement description must be a JSON object")
    has_outcomes = "outcomes" in obj
    has_weights = "weights" in obj
    if has_outcomes == has_weights:
        raise ValueError(
            "measurement description needs exactly one of 'outcomes' or 'weights'"
        )
    if has_outcomes:
        entries = obj["outcomes"]
        if not isinstance(entries, list) or not entries:
            raise ValueError("'outcomes' must be a non-empty list")
        coeffs = []
        for i, e in enumerate(entries):
            try:
                coeffs.append(
                    KrausCoefficients(
                        m=float(e["m"]),
                        l=float(e["l"]),
                        alpha=float(e.get("alpha", 0.0)),
                        delta=float(e.get("delta", 0.0)),
                    )
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise ValueError(f"bad outcome entry at index {i}: {exc}") from exc
        return MeasurementModel(tuple(coeffs))
    entries = obj["weights"]
    if not isinstance(entries, list) or not entries:
        raise ValueError("'weights' must be a non-empty list")
    weights = []
    for i, e in enumerate(entries):
        try:
            weights.append(OutcomeWeights(p=float(e["p"]), q=float(e["q"])))
        except ConstraintViolation:
            raise
        except (KeyError, TypeError, ValueError) as exc:
            raise ValueError(f"bad weight entry at index {i}: {exc}") from exc
    return MeasurementModel.from_weights(weights)
