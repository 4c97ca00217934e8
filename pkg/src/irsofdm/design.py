"""Discrete training-pattern design minimising the LS estimation error.

The objective is ``sum_n ||inv(Psi_n)||_F^2`` over all subcarriers, the
pattern-dependent factor of the LS channel-estimation NMSE. Two
coordinate-descent designers are provided:

* :func:`ao_design` sweeps every element/slot coordinate and picks the best
  of all ``2**bits`` codebook phases (low resolution).
* :func:`high_res_design` starts from a 2-bit design and, one extra bit at a
  time, only tries the current phase and its two codebook neighbours.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import hadamard

from .exceptions import DesignInfeasibleError
from .reflection import PRACTICAL, PatternMatrix, build_codebook, response_table

INFEASIBLE = math.inf
DEFAULT_COND_THRESHOLD = 1e8

# Relative margin a candidate must beat the incumbent by to replace it.
# Guards the tie-keeps-incumbent rule against rounding noise.
_TIE_RTOL = 1e-10


@dataclass
class DesignConfig:
    s_max: int = 2
    bits: int = 1
    cond_threshold: float = DEFAULT_COND_THRESHOLD
    eval_budget: int | None = None
    max_exhaustive_bits: int = 3
    incremental: bool = True

    def __post_init__(self):
        if self.s_max < 1:
            raise ValueError("s_max must be >= 1")
        if self.bits < 1:
            raise ValueError("bits must be >= 1")
        if not self.cond_threshold > 1:
            raise ValueError("cond_threshold must exceed 1")
        if self.eval_budget is not None and self.eval_budget < 1:
            raise ValueError("eval_budget must be positive when given")

    def to_dict(self):
        return {
            "s_max": self.s_max,
            "bits": self.bits,
            "cond_threshold": self.cond_threshold,
            "eval_budget": self.eval_budget,
            "max_exhaustive_bits": self.max_exhaustive_bits,
            "incremental": self.incremental,
        }


@dataclass
class DesignResult:
    """Designed pattern plus search instrumentation.

    ``objective_trace`` holds the objective after every completed coordinate
    update; ``stage_objectives`` the objective at the start and after each
    AO sweep or resolution level.
    """

    pattern: PatternMatrix
    objective: float
    objective_trace: list = field(default_factory=list)
    eval_count: int = 0
    initial_objective: float | None = None
    stage_objectives: list = field(default_factory=list)
    algorithm: str = ""
    truncated: bool = False
    info: dict = field(default_factory=dict)


def singular_values(matrices):
    """Singular values of a stack of square matrices, descending along the last axis."""
    return np.linalg.svd(matrices, compute_uv=False)


def _score(matrices, cond_threshold):
    """Objective and feasibility of stacks of per-subcarrier matrices.

    ``matrices`` has shape ``(..., N, K, K)``; returns objective of shape
    ``(...)`` with infeasible entries set to ``inf``, and the per-subcarrier
    condition numbers of shape ``(..., N)``.
    """
    s = singular_values(matrices)
    smin = s[..., -1]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond = np.where(smin > 0, s[..., 0] / smin, np.inf)
        obj = np.sum(1.0 / s**2, axis=(-2, -1))
    bad = np.any(~(cond <= cond_threshold), axis=-1)
    return np.where(bad, INFEASIBLE, obj), cond


def objective_of_matrices(matrices, cond_threshold=DEFAULT_COND_THRESHOLD):
    """Sum over subcarriers of ``tr(inv(P)^H inv(P))`` or ``inf`` if any is ill-conditioned."""
    obj, _ = _score(np.asarray(matrices), cond_threshold)
    return float(obj)


def _check_square(pattern):
    M, K = pattern.shape
    if K != M + 1:
        raise ValueError(f"pattern must be M x (M+1) for training, got {M} x {K}")


class _Evaluator:
    """Objective of patterns over one codebook, with an evaluation counter.

    Holds a current pattern (set by :meth:`start`). In incremental mode the
    inverse of every training matrix is cached and single-entry candidates
    are scored with a Sherman-Morrison update; feasibility is first screened
    with the Frobenius bound ``cond_2 <= ||P||_F ||inv(P)||_F`` and only
    candidates failing the screen get an exact SVD.
    """

    def __init__(self, params, grid, bits, mode, cond_threshold, incremental=False):
        self.codebook = build_codebook(bits)
        # (2**bits, N) reflection coefficient of every codebook phase per subcarrier
        self.table = response_table(params, self.codebook.values, grid.frequencies, mode)
        self.cond_threshold = cond_threshold
        self.incremental = incremental
        self.count = 0

    def matrices(self, indices):
        M, K = indices.shape
        N = self.table.shape[1]
        out = np.ones((N, M + 1, K), dtype=complex)
        out[:, 1:, :] = np.moveaxis(self.table[indices], -1, 0)
        return out

    def objective(self, indices):
        return float(_score(self.matrices(indices), self.cond_threshold)[0])

    def start(self, indices):
        """Make ``indices`` the current pattern and return its objective."""
        self.mats = self.matrices(indices)
        obj = float(_score(self.mats, self.cond_threshold)[0])
        if self.incremental and obj != INFEASIBLE:
            # keep the SVD value so an untouched pattern reports exactly design_objective()
            self._refresh()
        return obj

    def _refresh(self):
        self.inv = np.linalg.inv(self.mats)
        self.inv_fro2 = np.sum(np.abs(self.inv) ** 2, axis=(-2, -1))
        self.fro2 = np.sum(np.abs(self.mats) ** 2, axis=(-2, -1))

    def accept(self, row, col, option):
        self.mats[:, row + 1, col] = self.table[option]
        if self.incremental:
            self._refresh()

    def candidates(self, row, col, options):
        """Objective of the current pattern with entry (row, col) set to each option."""
        self.count += len(options)
        if not self.incremental:
            stack = np.repeat(self.mats[None], len(options), axis=0)
            stack[:, :, row + 1, col] = self.table[options]
            return _score(stack, self.cond_threshold)[0]

        r = row + 1
        new = self.table[options]  # (C, N)
        old = self.mats[:, r, col]
        delta = new - old
        X = self.inv
        u = X[:, :, r]  # inv(P) e_r
        v = X[:, col, :]  # e_col^T inv(P)
        with np.errstate(divide="ignore", invalid="ignore"):
            s = delta / (1 + delta * X[:, col, r])
            t = np.einsum("nab,na,nb->n", X.conj(), u, v)
            inv_fro2 = (self.inv_fro2 - 2 * np.real(s * t)
                        + np.abs(s) ** 2 * np.sum(np.abs(u) ** 2, -1) * np.sum(np.abs(v) ** 2, -1))
            fro2 = self.fro2 - np.abs(old) ** 2 + np.abs(new) ** 2
            bound = np.sqrt(fro2 * inv_fro2)
        values = np.sum(inv_fro2, axis=-1)
        unsure = np.any(~(bound <= self.cond_threshold) | ~(inv_fro2 > 0), axis=-1)
        if np.any(unsure):
            stack = np.repeat(self.mats[None], int(np.sum(unsure)), axis=0)
            stack[:, :, r, col] = new[unsure]
            values[unsure] = _score(stack, self.cond_threshold)[0]
        return values


def design_objective(pattern, params, grid, mode=PRACTICAL, cond_threshold=DEFAULT_COND_THRESHOLD):
    """Training-pattern cost ``sum_n ||inv(Psi_n)||_F^2``; ``inf`` when infeasible."""
    _check_square(pattern)
    ev = _Evaluator(params, grid, pattern.bits, mode, cond_threshold)
    return ev.objective(pattern.indices)


def condition_numbers(matrices):
    """2-norm condition number of each matrix in a stack (``inf`` when singular)."""
    s = singular_values(np.asarray(matrices))
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s[..., -1] > 0, s[..., 0] / s[..., -1], np.inf)


def check_feasibility(pattern, params, grid, mode=PRACTICAL, cond_threshold=DEFAULT_COND_THRESHOLD):
    """Whether every per-subcarrier training matrix is invertible within the threshold.

    Returns ``(feasible, cond)`` with ``cond`` the condition number per subcarrier.
    """
    _check_square(pattern)
    ev = _Evaluator(params, grid, pattern.bits, mode, cond_threshold)
    mats = ev.matrices(pattern.indices)
    if not np.all(mats[:, 0, :] == 1):
        raise AssertionError("first row of a training matrix must be all ones")
    cond = condition_numbers(mats)
    return bool(np.all(cond <= cond_threshold)), cond


def _offsets(step, retries):
    # 0, 1/2, 1/4, 3/4, 1/8, 3/8, ... of one codebook step
    out = [0.0]
    denom = 2
    while len(out) < retries + 1:
        for num in range(1, denom, 2):
            out.append(step * num / denom)
        denom *= 2
    return out[: retries + 1]


def dft_hadamard_init(M, K, codebook, params, grid, mode=PRACTICAL,
                      cond_threshold=DEFAULT_COND_THRESHOLD, max_retries=8):
    """Baseline training pattern from a Hadamard or quantized DFT matrix.

    With a 1-bit codebook and ``K`` a power of two, the element rows are
    taken from a Sylvester Hadamard matrix (+1 -> 0, -1 -> pi). Otherwise
    entry (m, k) is the DFT phase ``2 pi m k / K`` rounded to the nearest
    codebook phase. If the result is infeasible the DFT phases are shifted by
    a fraction of a codebook step and re-quantized, up to ``max_retries``
    times.

    Returns ``(pattern, construction)`` where ``construction`` names the
    recipe that produced it.
    """
    if K != M + 1:
        raise ValueError(f"training needs K = M + 1 slots, got M={M}, K={K}")
    bits = codebook.bits

    def feasible(p):
        return check_feasibility(p, params, grid, mode, cond_threshold)[0]

    if bits == 1 and K & (K - 1) == 0:
        H = hadamard(K)
        pattern = PatternMatrix(np.where(H[1:] > 0, 0, 1), bits)
        if feasible(pattern):
            return pattern, "sylvester-hadamard"

    m = np.arange(1, M + 1)[:, None]
    k = np.arange(K)[None, :]
    dft_phase = 2 * np.pi * m * k / K
    for offset in _offsets(codebook.step, max_retries):
        pattern = PatternMatrix(codebook.quantize(dft_phase, offset), bits)
        if feasible(pattern):
            label = "quantized-dft" if offset == 0 else f"quantized-dft(offset={offset / codebook.step:g} step)"
            return pattern, label
    raise DesignInfeasibleError(
        f"no feasible DFT-based initializer for M={M}, bits={bits} after {max_retries} offsets"
    )


def baseline_design(M, bits, params, grid, mode=PRACTICAL, cond_threshold=DEFAULT_COND_THRESHOLD):
    """The DFT/Hadamard baseline wrapped as a :class:`DesignResult`."""
    pattern, construction = dft_hadamard_init(M, M + 1, build_codebook(bits), params, grid, mode, cond_threshold)
    obj = design_objective(pattern, params, grid, mode, cond_threshold)
    return DesignResult(
        pattern=pattern,
        objective=obj,
        objective_trace=[obj],
        eval_count=0,
        initial_objective=obj,
        stage_objectives=[obj],
        algorithm="dft",
        info={"construction": construction},
    )


def _descend(ev, indices, coordinate_options, obj, trace, budget):
    """One pass of coordinate descent over every element/slot coordinate.

    ``coordinate_options(current)`` gives the candidate codebook indices for
    a coordinate; the incumbent must be among them. ``obj`` is the running
    objective; it only changes when a candidate wins, so the trace is
    non-increasing. Returns the updated objective and whether the evaluation
    budget cut the pass short.
    """
    M, K = indices.shape
    for row in range(M):
        for col in range(K):
            current = indices[row, col]
            options = np.asarray(coordinate_options(current))
            if budget is not None and ev.count + len(options) > budget:
                return obj, True
            values = ev.candidates(row, col, options)
            inc = values[options == current][0]
            best = int(np.argmin(values))
            if values[best] < inc * (1 - _TIE_RTOL):
                indices[row, col] = options[best]
                ev.accept(row, col, options[best])
                obj = float(values[best])
            trace.append(obj)
    return obj, False


def ao_design(init, config, params, grid, mode=PRACTICAL):
    """Alternating-optimisation design with exhaustive per-coordinate search.

    Runs ``config.s_max`` sweeps; each sweep visits element rows in order and,
    within a row, every slot, replacing the phase by the codebook value that
    minimises the objective with everything else fixed. Ties keep the
    current value.
    """
    _check_square(init)
    bits = init.bits
    if bits > config.max_exhaustive_bits:
        raise ValueError(
            f"exhaustive search over {2**bits} phases exceeds the cap of "
            f"{config.max_exhaustive_bits} bits; use high_res_design"
        )
    ev = _Evaluator(params, grid, bits, mode, config.cond_threshold, config.incremental)
    indices = init.indices.copy()
    obj = ev.start(indices)
    if obj == INFEASIBLE:
        raise DesignInfeasibleError("initial pattern is infeasible")
    result = DesignResult(pattern=init, objective=obj, initial_objective=obj, stage_objectives=[obj],
                          algorithm="ao")
    everything = np.arange(ev.codebook.size)
    for _ in range(config.s_max):
        obj, cut = _descend(ev, indices, lambda q: everything, obj, result.objective_trace, config.eval_budget)
        if cut:
            result.truncated = True
            break
        result.stage_objectives.append(obj)
    result.pattern = PatternMatrix(indices, bits)
    result.objective = obj
    result.eval_count = ev.count
    return result


def neighbor_set(codebook, value):
    """The codebook phase equal to ``value`` and its two circular neighbours.

    Returned in the order ``[q - 1, q, q + 1]`` (indices modulo the codebook size).
    """
    q = int(codebook.index_of(value))
    idx = np.mod([q - 1, q, q + 1], codebook.size)
    return codebook.values[idx]


def high_res_design(base, target_bits, config, params, grid, mode=PRACTICAL, base_bits=2):
    """Neighbour-restricted refinement from a low-resolution design.

    For every extra bit from ``base_bits + 1`` to ``target_bits`` the pattern
    is re-expressed in the finer codebook and each coordinate is moved to the
    best of its current phase and the two adjacent phases.
    """
    pattern = base.pattern if isinstance(base, DesignResult) else base
    _check_square(pattern)
    if pattern.bits != base_bits:
        raise ValueError(f"base pattern has {pattern.bits} bits, expected {base_bits}")
    if target_bits <= base_bits:
        raise ValueError(f"target_bits must exceed {base_bits}")

    indices = pattern.indices.copy()
    start = _Evaluator(params, grid, base_bits, mode, config.cond_threshold, config.incremental).start(indices)
    if start == INFEASIBLE:
        raise DesignInfeasibleError("base pattern is infeasible")
    if isinstance(base, DesignResult) and np.isclose(base.objective, start, rtol=1e-9, atol=0):
        # continue the base design's running objective so the joint trace stays monotone
        start = base.objective
    result = DesignResult(pattern=pattern, objective=start, initial_objective=start, stage_objectives=[start],
                          algorithm="highres")
    obj = start
    count = 0
    for bits in range(base_bits + 1, target_bits + 1):
        indices *= 2
        ev = _Evaluator(params, grid, bits, mode, config.cond_threshold, config.incremental)
        ev.start(indices)
        ev.count = count
        size = ev.codebook.size
        obj, cut = _descend(ev, indices, lambda q: np.mod([q - 1, q, q + 1], size), obj,
                            result.objective_trace, config.eval_budget)
        count = ev.count
        if cut:
            result.truncated = True
            result.pattern = PatternMatrix(indices, bits)
            break
        result.stage_objectives.append(obj)
        result.pattern = PatternMatrix(indices.copy(), bits)
    result.objective = obj
    result.eval_count = count
    return result
