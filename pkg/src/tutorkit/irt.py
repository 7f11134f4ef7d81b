"""Two-parameter logistic response model: probability, calibration, ability estimation."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    EmptyInputError,
    InvalidParameterError,
    NotConvergedError,
    UndefinedAUCError,
    ValidationError,
)

logger = logging.getLogger(__name__)

EXPONENT_CAP = 500.0      # keeps exp() finite; probabilities stay inside (0, 1)
PARAM_BOUND = 6.0         # hard box for theta and difficulty
INIT_DIFFICULTY_BOUND = 3.0
LOG_A_PRIOR_SIGMA = 0.5   # LogNormal(0, 0.5) prior on discrimination
_MAX_HALVINGS = 30


def _sigmoid(x):
    """Logistic function with exponent capping for numerical stability."""
    z = np.clip(x, -EXPONENT_CAP, EXPONENT_CAP)
    return 1.0 / (1.0 + np.exp(-z))


def _softplus(x):
    """log(1 + exp(x)) computed without overflow."""
    return np.logaddexp(0.0, np.clip(x, -EXPONENT_CAP, EXPONENT_CAP))


@dataclass(frozen=True)
class ItemParams:
    """Discrimination and difficulty of a single exercise."""

    item_id: str
    discrimination: float
    difficulty: float

    def __post_init__(self):
        if not (math.isfinite(self.discrimination) and self.discrimination > 0):
            raise InvalidParameterError(
                f"discrimination must be finite and > 0, got {self.discrimination!r} "
                f"for item {self.item_id!r}"
            )
        if not math.isfinite(self.difficulty):
            raise InvalidParameterError(
                f"difficulty must be finite, got {self.difficulty!r} for item {self.item_id!r}"
            )


@dataclass(frozen=True)
class Ability:
    """A scalar ability estimate on the logit scale."""

    theta: float
    standard_error: float | None = None
    no_data: bool = False

    def __post_init__(self):
        if not math.isfinite(self.theta):
            raise InvalidParameterError(f"theta must be finite, got {self.theta!r}")
        if self.standard_error is not None and self.standard_error < 0:
            raise InvalidParameterError("standard_error must be nonnegative")


@dataclass(frozen=True)
class InteractionRecord:
    """One graded response: a student answered an item correctly or not."""

    student_id: str
    item_id: str
    correct: int

    def __post_init__(self):
        if self.correct not in (0, 1):
            raise ValidationError(
                f"correct must be 0 or 1, got {self.correct!r} "
                f"({self.student_id!r}, {self.item_id!r})"
            )


@dataclass(frozen=True)
class CalibrationConfig:
    """Knobs for the joint calibration run."""

    max_iterations: int = 500
    tolerance: float = 1e-5
    seed: int = 0
    use_priors: bool = True
    strict: bool = False


@dataclass
class CalibrationResult:
    """Fitted item parameters and student abilities plus run diagnostics."""

    item_params: dict[str, ItemParams]
    student_abilities: dict[str, Ability]
    final_neg_log_posterior: float
    iterations: int
    converged: bool
    objective_trace: list[float] = field(default_factory=list)


def prob_correct(params: ItemParams, theta: float) -> float:
    """P(correct) = 1 / (1 + exp(-a * (theta - d))).

    Monotone increasing in theta, decreasing in d; P = 0.5 exactly at theta = d.
    """
    if not math.isfinite(theta):
        raise InvalidParameterError(f"theta must be finite, got {theta!r}")
    return float(_sigmoid(params.discrimination * (theta - params.difficulty)))


def neg_log_posterior(
    theta: np.ndarray,
    difficulty: np.ndarray,
    log_a: np.ndarray,
    student_idx: np.ndarray,
    item_idx: np.ndarray,
    correct: np.ndarray,
    use_priors: bool = True,
) -> float:
    """Penalized negative log-likelihood of the full parameter set.

    Responses enter through the logistic likelihood; the penalty terms are the
    Normal(0,1) priors on theta and difficulty and the Normal(0, 0.5) prior on
    log discrimination.
    """
    a = np.exp(log_a)
    z = a[item_idx] * (theta[student_idx] - difficulty[item_idx])
    value = float(np.sum(_softplus(z) - correct * z))
    if use_priors:
        value += 0.5 * float(np.sum(theta**2))
        value += 0.5 * float(np.sum(difficulty**2))
        value += float(np.sum(log_a**2)) / (2.0 * LOG_A_PRIOR_SIGMA**2)
    return value


def neg_log_posterior_grad(
    theta: np.ndarray,
    difficulty: np.ndarray,
    log_a: np.ndarray,
    student_idx: np.ndarray,
    item_idx: np.ndarray,
    correct: np.ndarray,
    use_priors: bool = True,
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Analytic gradient of neg_log_posterior w.r.t. (theta, difficulty, log_a)."""
    a = np.exp(log_a)
    z = a[item_idx] * (theta[student_idx] - difficulty[item_idx])
    p = _sigmoid(z)
    resid = p - correct  # d(nll)/dz per record
    g_theta = np.bincount(student_idx, weights=resid * a[item_idx], minlength=len(theta))
    g_d = np.bincount(item_idx, weights=-resid * a[item_idx], minlength=len(difficulty))
    g_x = np.bincount(item_idx, weights=resid * z, minlength=len(log_a))
    if use_priors:
        g_theta = g_theta + theta
        g_d = g_d + difficulty
        g_x = g_x + log_a / LOG_A_PRIOR_SIGMA**2
    return g_theta, g_d, g_x


def _index_records(records):
    """Map records onto dense integer ids, sorted for determinism."""
    students = sorted({r.student_id for r in records})
    items = sorted({r.item_id for r in records})
    s_pos = {s: k for k, s in enumerate(students)}
    i_pos = {i: k for k, i in enumerate(items)}
    s_idx = np.fromiter((s_pos[r.student_id] for r in records), dtype=np.intp, count=len(records))
    i_idx = np.fromiter((i_pos[r.item_id] for r in records), dtype=np.intp, count=len(records))
    y = np.fromiter((r.correct for r in records), dtype=np.float64, count=len(records))
    return students, items, s_idx, i_idx, y


def calibrate(records, config: CalibrationConfig | None = None) -> CalibrationResult:
    """Jointly fit abilities and item parameters by penalized maximum likelihood.

    Alternates damped Newton updates between the student block and the item
    block until the largest parameter change falls below the tolerance. Each
    block update backtracks on its own restricted objective, so the penalized
    objective never increases between iterations.
    """
    cfg = config or CalibrationConfig()
    records = list(records)
    if not records:
        raise EmptyInputError("calibration needs at least one interaction record")

    students, items, s_idx, i_idx, y = _index_records(records)
    n_students, n_items = len(students), len(items)

    item_correct = np.bincount(i_idx, weights=y, minlength=n_items)
    item_count = np.bincount(i_idx, minlength=n_items).astype(float)
    if not cfg.use_priors:
        degenerate = [
            items[k]
            for k in range(n_items)
            if item_correct[k] == 0 or item_correct[k] == item_count[k]
        ]
        if degenerate:
            raise InvalidParameterError(
                "priors are disabled but these items have single-valued outcomes: "
                + ", ".join(degenerate)
            )

    theta = np.zeros(n_students)
    error_rate = np.clip(1.0 - item_correct / item_count, 1e-6, 1.0 - 1e-6)
    d = np.clip(np.log(error_rate / (1.0 - error_rate)),
                -INIT_DIFFICULTY_BOUND, INIT_DIFFICULTY_BOUND)
    x = np.zeros(n_items)  # log discrimination

    prior_w_x = 1.0 / LOG_A_PRIOR_SIGMA**2
    prior_w = 1.0 if cfg.use_priors else 0.0

    def student_objectives(theta_vec):
        a = np.exp(x)
        z = a[i_idx] * (theta_vec[s_idx] - d[i_idx])
        nll = np.bincount(s_idx, weights=_softplus(z) - y * z, minlength=n_students)
        return nll + prior_w * 0.5 * theta_vec**2

    def item_objectives(d_vec, x_vec):
        a = np.exp(x_vec)
        z = a[i_idx] * (theta[s_idx] - d_vec[i_idx])
        nll = np.bincount(i_idx, weights=_softplus(z) - y * z, minlength=n_items)
        return nll + prior_w * (0.5 * d_vec**2 + x_vec**2 / (2.0 * LOG_A_PRIOR_SIGMA**2))

    def total_objective():
        return neg_log_posterior(theta, d, x, s_idx, i_idx, y, cfg.use_priors)

    trace = [total_objective()]
    iterations = 0
    converged = False

    for _ in range(cfg.max_iterations):
        iterations += 1
        max_delta = 0.0

        # Student block: simultaneous 1D Newton steps, backtracked per student.
        a = np.exp(x)
        z = a[i_idx] * (theta[s_idx] - d[i_idx])
        p = _sigmoid(z)
        w = p * (1.0 - p)
        g = np.bincount(s_idx, weights=(p - y) * a[i_idx], minlength=n_students) + prior_w * theta
        h = np.bincount(s_idx, weights=w * a[i_idx] ** 2, minlength=n_students) + prior_w
        step = -g / np.maximum(h, 1e-9)
        f0 = student_objectives(theta)
        for _ in range(_MAX_HALVINGS):
            cand = np.clip(theta + step, -PARAM_BOUND, PARAM_BOUND)
            f1 = student_objectives(cand)
            worse = f1 > f0
            if not np.any(worse):
                break
            step = np.where(worse, step * 0.5, step)
        else:
            cand = np.clip(theta + step, -PARAM_BOUND, PARAM_BOUND)
            f1 = student_objectives(cand)
            cand = np.where(f1 > f0, theta, cand)
        if n_students:
            max_delta = max(max_delta, float(np.max(np.abs(cand - theta))))
        theta = cand

        # Item block: 2x2 Fisher-scoring Newton on (difficulty, log a) per item.
        a = np.exp(x)
        z = a[i_idx] * (theta[s_idx] - d[i_idx])
        p = _sigmoid(z)
        w = p * (1.0 - p)
        resid = p - y
        g_d = np.bincount(i_idx, weights=-resid * a[i_idx], minlength=n_items) + prior_w * d
        g_x = np.bincount(i_idx, weights=resid * z, minlength=n_items) + prior_w * prior_w_x * x
        h_dd = np.bincount(i_idx, weights=w * a[i_idx] ** 2, minlength=n_items) + prior_w
        h_xx = np.bincount(i_idx, weights=w * z**2, minlength=n_items) + prior_w * prior_w_x
        h_xd = np.bincount(i_idx, weights=-w * z * a[i_idx], minlength=n_items)
        h_dd = np.maximum(h_dd, 1e-9)
        h_xx = np.maximum(h_xx, 1e-9)
        det = np.maximum(h_dd * h_xx - h_xd**2, 1e-12)
        step_d = -(h_xx * g_d - h_xd * g_x) / det
        step_x = -(h_dd * g_x - h_xd * g_d) / det
        f0 = item_objectives(d, x)
        for _ in range(_MAX_HALVINGS):
            cand_d = np.clip(d + step_d, -PARAM_BOUND, PARAM_BOUND)
            cand_x = x + step_x
            f1 = item_objectives(cand_d, cand_x)
            worse = f1 > f0
            if not np.any(worse):
                break
            step_d = np.where(worse, step_d * 0.5, step_d)
            step_x = np.where(worse, step_x * 0.5, step_x)
        else:
            cand_d = np.clip(d + step_d, -PARAM_BOUND, PARAM_BOUND)
            cand_x = x + step_x
            f1 = item_objectives(cand_d, cand_x)
            keep = f1 > f0
            cand_d = np.where(keep, d, cand_d)
            cand_x = np.where(keep, x, cand_x)
        if n_items:
            max_delta = max(max_delta, float(np.max(np.abs(cand_d - d))))
            max_delta = max(max_delta, float(np.max(np.abs(cand_x - x))))
        d, x = cand_d, cand_x

        trace.append(total_objective())
        if max_delta < cfg.tolerance:
            converged = True
            break

    if not converged:
        if cfg.strict:
            raise NotConvergedError(
                f"calibration stopped at {iterations} iterations without "
                f"reaching tolerance {cfg.tolerance:.1e}"
            )
        logger.warning(
            "calibration stopped at %d iterations without reaching tolerance %.1e",
            iterations, cfg.tolerance,
        )

    # Posterior curvature at the solution gives the reported standard errors.
    a = np.exp(x)
    z = a[i_idx] * (theta[s_idx] - d[i_idx])
    w = _sigmoid(z) * (1.0 - _sigmoid(z))
    info = np.bincount(s_idx, weights=w * a[i_idx] ** 2, minlength=n_students) + prior_w
    se = 1.0 / np.sqrt(np.maximum(info, 1e-9))

    item_params = {
        items[k]: ItemParams(items[k], float(a[k]), float(d[k])) for k in range(n_items)
    }
    abilities = {
        students[k]: Ability(float(theta[k]), float(se[k])) for k in range(n_students)
    }
    return CalibrationResult(
        item_params=item_params,
        student_abilities=abilities,
        final_neg_log_posterior=trace[-1],
        iterations=iterations,
        converged=converged,
        objective_trace=trace,
    )


def estimate_theta(responses) -> Ability:
    """MAP ability estimate under a standard normal prior, items held fixed.

    An empty response list is not an error: the prior mean (theta = 0) comes
    back flagged as no_data.
    """
    responses = list(responses)
    if not responses:
        return Ability(0.0, 1.0, no_data=True)
    for params, correct in responses:
        if correct not in (0, 1):
            raise ValidationError(f"correct must be 0 or 1, got {correct!r} for {params.item_id!r}")
    a = np.array([p.discrimination for p, _ in responses])
    d = np.array([p.difficulty for p, _ in responses])
    y = np.array([float(c) for _, c in responses])

    def objective(t):
        z = a * (t - d)
        return float(np.sum(_softplus(z) - y * z)) + 0.5 * t * t

    theta = 0.0
    curvature = 1.0
    for _ in range(100):
        z = a * (theta - d)
        p = _sigmoid(z)
        grad = float(np.sum(a * (p - y))) + theta
        curvature = float(np.sum(a**2 * p * (1.0 - p))) + 1.0
        step = -grad / curvature
        f0 = objective(theta)
        cand = float(np.clip(theta + step, -PARAM_BOUND, PARAM_BOUND))
        for _ in range(_MAX_HALVINGS):
            if objective(cand) <= f0:
                break
            step *= 0.5
            cand = float(np.clip(theta + step, -PARAM_BOUND, PARAM_BOUND))
        else:
            cand = theta
        moved = abs(cand - theta)
        theta = cand
        if moved < 1e-12:
            break
    return Ability(theta, 1.0 / math.sqrt(curvature))


def compute_auc(predictions, outcomes) -> float:
    """Area under the ROC curve via the Mann-Whitney rank statistic.

    Tied predictions contribute 1/2. Undefined when outcomes are single-class.
    """
    p = np.asarray(list(predictions), dtype=float)
    y = np.asarray(list(outcomes))
    if p.shape != y.shape:
        raise ValidationError(f"length mismatch: {p.shape[0]} predictions, {y.shape[0]} outcomes")
    if p.size == 0:
        raise EmptyInputError("AUC needs at least one prediction")
    if not np.all(np.isin(y, (0, 1))):
        raise ValidationError("outcomes must be 0 or 1")
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise UndefinedAUCError(
            f"AUC is undefined with {n_pos} positive and {n_neg} negative outcomes"
        )
    # Average ranks within tie groups, 1-based.
    _, inverse, counts = np.unique(p, return_inverse=True, return_counts=True)
    ends = np.cumsum(counts)
    starts = ends - counts
    mean_rank = (starts + 1 + ends) / 2.0
    ranks = mean_rank[inverse]
    rank_sum = float(np.sum(ranks[y == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def learning_gain(theta_pre: float, theta_post: float, items) -> float:
    """Mean predicted correctness over the items at theta_post minus at theta_pre."""
    items = list(items)
    if not items:
        raise EmptyInputError("learning gain needs at least one item")
    a = np.array([p.discrimination for p in items])
    d = np.array([p.difficulty for p in items])
    p_post = float(np.mean(_sigmoid(a * (theta_post - d))))
    p_pre = float(np.mean(_sigmoid(a * (theta_pre - d))))
    return p_post - p_pre


def params_to_doc(item_params, meta=None) -> dict:
    """Serialize fitted item parameters to the single-document form:
    {items: [{item_id, a, d}], meta: {seed, iterations, converged}}."""
    items = [
        {"item_id": p.item_id, "a": p.discrimination, "d": p.difficulty}
        for p in sorted(item_params.values(), key=lambda p: p.item_id)
    ]
    return {"items": items, "meta": dict(meta or {})}


def params_from_doc(doc) -> dict:
    """Read a fitted-parameter document back into an item_id -> ItemParams map."""
    if not isinstance(doc, dict) or not isinstance(doc.get("items"), list):
        raise InvalidParameterError("parameter document needs an 'items' list")
    out = {}
    for row in doc["items"]:
        try:
            params = ItemParams(row["item_id"], float(row["a"]), float(row["d"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidParameterError(f"bad parameter row {row!r}: {exc}") from None
        if params.item_id in out:
            raise InvalidParameterError(f"duplicate item_id {params.item_id!r}")
        out[params.item_id] = params
    return out
