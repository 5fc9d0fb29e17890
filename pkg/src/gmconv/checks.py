"""
Randomized property suites over groups, group matrices, displacement and layers.

Trial ``t`` of a suite draws from ``default_rng([seed, t])`` so any failing
trial can be replayed on its own. Failing trials keep their inputs as
counterexamples, which ``dump_counterexamples`` writes as GMAT files plus a
JSON description.
"""

from __future__ import annotations

import json
from collections.abc import Callable
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np
import scipy.linalg

from gmconv.displacement import (
    BoundMode,
    ClassMode,
    LDRKernel,
    PermutationFamily,
    check_class_dimensions,
    check_distance_bounds,
    displacement_d,
    displacement_d_family,
    displacement_dimension,
    ldr_build,
    ldr_class_basis,
    numerical_rank,
)
from gmconv.exceptions import AccuracyError, ConfigError, NoInverseError
from gmconv.groups import (
    FiniteGroup,
    direct_product,
    homogeneous_space,
    make_cyclic,
    right_cosets,
    subgroup_from_generators,
    word_ball,
)
from gmconv.layers.conv import (
    ErrorMode,
    GMConvLayer,
    StrideLayer,
    gmconv_backward,
    gmconv_forward,
    stride_backward,
    stride_forward,
)
from gmconv.layers.equivariance import translation_action
from gmconv.layers.homogeneous import (
    HomSpaceConvLayer,
    homspace_conv_backward,
    homspace_conv_forward,
)
from gmconv.layers.padding import (
    PaddedWindow,
    padded_conv_backward,
    padded_conv_displacement_bound,
    padded_conv_forward,
)
from gmconv.layers.pooling import GMPoolLayer, PoolMode, pool_backward, pool_forward
from gmconv.matio import json_default, write_gmat
from gmconv.matrices import (
    DiagonalBasisForm,
    densify,
    f_of,
    gm_from_coeffs,
    gm_inverse,
    gm_kronecker,
    gm_multiply,
    gm_transpose,
    group_diagonal,
    is_group_matrix,
    m_of,
    restrict_matrix,
    restrict_to_subgroup,
)
from gmconv.nn.blocks import PReLUBlock, ReadoutBlock
from gmconv.telemetry import get_recorder

CLOSURE_TOL = 1e-10
INVERSE_MAX_CONDITION = 1e8
GRADIENT_TOL = 1e-5
FD_STEP = 1e-5


@dataclass
class Counterexample:
    trial: int
    description: str
    matrices: dict[str, np.ndarray] = field(default_factory=dict)
    extra: dict[str, Any] = field(default_factory=dict)


@dataclass
class SuiteResult:
    suite: str
    group: str
    trials: int
    seed: int
    failures: int = 0
    skipped: int = 0
    details: dict[str, Any] = field(default_factory=dict)
    counterexamples: list[Counterexample] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.failures == 0

    def fail(self, trial: int, description: str, **matrices: np.ndarray) -> None:
        self.failures += 1
        self.counterexamples.append(Counterexample(trial, description, dict(matrices)))

    def summary(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "group": self.group,
            "passed": self.passed,
            "trials": self.trials,
            "seed": self.seed,
            "failures": self.failures,
            "skipped": self.skipped,
            "details": self.details,
        }


@dataclass(frozen=True)
class CheckOptions:
    trials: int = 1000
    seed: int = 0
    other: FiniteGroup | None = None
    window: int = 8
    radius: int = 1
    lattice_dim: int = 1


def _trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, trial])


def _scaled_deviation(M: np.ndarray, G: FiniteGroup) -> float:
    return is_group_matrix(M, G, tol=np.inf).deviation / max(1.0, float(np.abs(M).max()))


def check_closure(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """Transpose, product, Kronecker and inverse of group matrices are group matrices."""
    H = options.other or make_cyclic(2)
    result = SuiteResult("closure", G.name, options.trials, options.seed)
    product = direct_product(G, H)
    worst = 0.0
    for t in range(options.trials):
        rng = _trial_rng(options.seed, t)
        M = gm_from_coeffs(G, rng.normal(size=G.order))
        N = gm_from_coeffs(G, rng.normal(size=G.order))
        K = gm_from_coeffs(H, rng.normal(size=H.order))
        dense_m, dense_n = densify(M), densify(N)
        dense_mk = np.kron(dense_m, densify(K))
        deviations = {
            "transpose": max(
                _scaled_deviation(dense_m.T, G),
                float(np.abs(dense_m.T - densify(gm_transpose(M))).max()),
            ),
            "product": max(
                _scaled_deviation(dense_m @ dense_n, G),
                float(np.abs(dense_m @ dense_n - densify(gm_multiply(M, N))).max())
                / max(1.0, float(np.abs(dense_m @ dense_n).max())),
            ),
            "kronecker": max(
                _scaled_deviation(dense_mk, product),
                float(np.abs(dense_mk - densify(gm_kronecker(M, K, product))).max()),
            ),
        }
        if np.linalg.cond(dense_m) > INVERSE_MAX_CONDITION:
            result.skipped += 1
        else:
            inverse = scipy.linalg.inv(dense_m)
            try:
                read_back = densify(gm_inverse(M))
                scale = max(1.0, float(np.abs(inverse).max()))
                deviations["inverse"] = max(
                    _scaled_deviation(inverse, G),
                    float(np.abs(inverse - read_back).max()) / scale,
                )
            except (NoInverseError, AccuracyError):
                deviations["inverse"] = np.inf
        worst = max(worst, *deviations.values())
        bad = [name for name, dev in deviations.items() if dev > CLOSURE_TOL]
        if bad:
            result.fail(t, f"closure fails for {', '.join(bad)}", M=dense_m, N=dense_n, MK=dense_mk)
    result.details = {"max_deviation": worst, "other": H.name}
    return result


def check_distance(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """Distance bounds for transpose, product and Kronecker product of random matrices."""
    H = options.other or make_cyclic(2)
    result = SuiteResult("distance", G.name, options.trials, options.seed)
    for t in range(options.trials):
        rng = _trial_rng(options.seed, t)
        M = rng.normal(size=(G.order, G.order))
        N = rng.normal(size=(G.order, G.order))
        K = rng.normal(size=(H.order, H.order))
        reports = [
            check_distance_bounds(M, None, G, BoundMode.TRANSPOSE),
            check_distance_bounds(M, N, G, BoundMode.PRODUCT),
            check_distance_bounds(M, K, G, BoundMode.KRONECKER, other_group=H),
        ]
        bad = [str(r.mode) for r in reports if not r.holds]
        if bad:
            result.fail(t, f"bound fails for {', '.join(bad)}", M=M, N=N, K=K)
    result.details = {"other": H.name}
    return result


def _single_row_class(G: FiniteGroup, row: int) -> list[np.ndarray]:
    basis = []
    for x in G.elements():
        F = np.zeros((G.order, G.order))
        F[row, x] = 1.0
        basis.append(m_of(DiagonalBasisForm(G, F)))
    return basis


def check_dimension(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """
    Displacement dimension of transposed, summed and Kronecker-combined classes.

    The class battery is fixed; ``trials`` is ignored and ``seed`` only draws the
    singleton classes.
    """
    H = options.other or make_cyclic(2)
    rng = _trial_rng(options.seed, 0)
    n = G.order
    gm_g = [group_diagonal(G, g).to_dense() for g in G.elements()]
    gm_h = [group_diagonal(H, h).to_dense() for h in H.elements()]
    ldr = ldr_class_basis(G, [min(1, n - 1)])
    single_m = [rng.normal(size=(n, n))]
    single_n = [rng.normal(size=(H.order, H.order))]

    battery: list[tuple[str, ClassMode, list, list | None, FiniteGroup | None]] = [
        ("gm transpose", ClassMode.TRANSPOSE, gm_g, None, None),
        ("ldr transpose", ClassMode.TRANSPOSE, ldr, None, None),
        ("row transpose", ClassMode.TRANSPOSE, _single_row_class(G, 0), None, None),
        ("gm + ldr", ClassMode.SUM, gm_g, ldr, None),
        ("gm kron gm", ClassMode.KRONECKER, gm_g, gm_h, H),
        ("ldr kron identity", ClassMode.KRONECKER, ldr, [np.eye(H.order)], H),
        ("singleton kron singleton", ClassMode.KRONECKER, single_m, single_n, H),
    ]
    if n > 1:
        battery.append(
            ("row0 + row1", ClassMode.SUM, _single_row_class(G, 0), _single_row_class(G, 1), None)
        )
    result = SuiteResult("dimension", G.name, len(battery), options.seed)
    reports = {}
    for i, (name, mode, first, second, second_group) in enumerate(battery):
        report = check_class_dimensions(mode, first, G, second, second_group)
        reports[name] = {"dims": report.dims, "bound": report.bound, "holds": report.holds}
        if not report.holds:
            result.fail(i, f"{name}: {report.dims} exceeds bound {report.bound}")

    # a group-matrix class against a singleton exceeds d_M + d_N; the span bound still holds
    wide = check_class_dimensions(ClassMode.KRONECKER, gm_g, G, single_n, H)
    reports["gm kron singleton"] = {
        "dims": wide.dims,
        "bound": wide.bound,
        "general_bound": wide.general_bound,
        "holds": wide.holds,
    }
    if not wide.general_holds:
        result.fail(len(battery), f"span bound fails: {wide.dims}")
    result.details = {"other": H.name, "classes": reports}
    return result


def check_restriction(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """Restricting B_h to a cyclic subgroup containing h gives the subgroup's own diagonal."""
    elements = list(G.elements())[: options.trials]
    result = SuiteResult("restriction", G.name, len(elements), options.seed)
    for t, a in enumerate(elements):
        H = subgroup_from_generators(G, [a])
        local = H.as_group
        outside = np.setdiff1d(np.arange(G.order), H.members)
        for h in H.member_ids:
            B = group_diagonal(G, h)
            dense = B.to_dense()
            native = group_diagonal(local, int(H.local_index[h]))
            restricted = restrict_to_subgroup(B, H)
            if not (
                np.array_equal(restricted.col_of_row, native.col_of_row)
                and np.array_equal(restrict_matrix(dense, H), native.to_dense())
                and not dense[np.ix_(H.members, outside)].any()
            ):
                result.fail(t, f"restriction of B_{h} to <{a}> differs", B=dense)
        rng = _trial_rng(options.seed, t)
        coeffs = np.zeros(G.order)
        coeffs[H.members] = rng.normal(size=H.order)
        over_g = densify(gm_from_coeffs(G, coeffs))
        over_h = densify(gm_from_coeffs(local, coeffs[H.members]))
        if not np.array_equal(restrict_matrix(over_g, H), over_h):
            result.fail(t, f"subgroup-supported conv on <{a}> does not restrict", M=over_g)
    return result


def check_padding(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """Padding bound on a lattice window, plus a boundary-free window covering G."""
    window = PaddedWindow.box([options.window] * options.lattice_dim, options.radius)
    full = PaddedWindow.over_group(G, list(G.elements()), options.radius)
    result = SuiteResult("padding", G.name, 2, options.seed)
    rng = _trial_rng(options.seed, 0)
    details = {}
    for t, (name, win) in enumerate((("lattice", window), ("group", full))):
        bound = padded_conv_displacement_bound(win, rng)
        details[name] = {
            "boundary": bound.boundary_size,
            "support": bound.support_size,
            "dim_bound": bound.dim_bound,
            "rank_bound": bound.rank_bound,
            "measured_dim": bound.measured_dim,
            "measured_rank": bound.measured_rank,
        }
        if not bound.holds:
            result.fail(t, f"{name} window exceeds its padding bound")
    result.details = details
    return result


def numerical_gradient(
    fn: Callable[[], float], array: np.ndarray, h: float = FD_STEP
) -> np.ndarray:
    """Central differences of ``fn`` with respect to ``array``, perturbed in place."""
    grad = np.zeros_like(array, dtype=float)
    for idx in np.ndindex(array.shape):
        original = array[idx]
        array[idx] = original + h
        plus = fn()
        array[idx] = original - h
        minus = fn()
        array[idx] = original
        grad[idx] = (plus - minus) / (2 * h)
    return grad


def relative_error(a: np.ndarray, b: np.ndarray) -> float:
    scale = max(float(np.linalg.norm(a)), float(np.linalg.norm(b)), 1e-12)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b))) / scale


GradientCase = tuple[Callable[[], float], dict[str, tuple[np.ndarray, np.ndarray]]]


def _random_subgroup(G: FiniteGroup, rng: np.random.Generator):
    return subgroup_from_generators(G, [int(rng.integers(G.order))])


def _conv_case(G: FiniteGroup, rng: np.random.Generator, error: ErrorMode | None) -> GradientCase:
    if error is ErrorMode.LDR and G.order < 2:
        error = None
    layer = GMConvLayer.create(G, 2, 2, k=1, error=error, rank=1, rng=rng)
    for array in layer.parameters().values():
        array[...] = rng.normal(size=array.shape)
    x = rng.normal(size=(2, 2, G.order))
    dy = rng.normal(size=(2, 2, G.order))
    grads = gmconv_backward(layer, x, dy)

    def loss() -> float:
        return float(np.sum(dy * gmconv_forward(layer, x)))

    pairs = {"x": (x, grads.dx), "weights": (layer.weights, grads.dweights)}
    if layer.error_term is not None:
        pairs["error"] = (layer.error_term.coefficients, grads.derror)
    return loss, pairs


def _stride_case(G: FiniteGroup, rng: np.random.Generator) -> GradientCase:
    H = _random_subgroup(G, rng)
    layer = StrideLayer(H, GMConvLayer.create(G, 2, 2, k=1, rng=rng))
    x = rng.normal(size=(2, 2, G.order))
    dy = rng.normal(size=(2, 2, H.order))
    grads = stride_backward(layer, x, dy)

    def loss() -> float:
        return float(np.sum(dy * stride_forward(layer, x)))

    return loss, {"x": (x, grads.dx), "weights": (layer.conv.weights, grads.dweights)}


def _pool_case(G: FiniteGroup, rng: np.random.Generator, mode: PoolMode) -> GradientCase:
    H = _random_subgroup(G, rng)
    layer = GMPoolLayer(right_cosets(G, H), mode)
    x = rng.normal(size=(2, 2, G.order))
    dy = rng.normal(size=(2, 2, H.order))
    dx = pool_backward(layer, x, dy)
    return (lambda: float(np.sum(dy * pool_forward(layer, x)))), {"x": (x, dx)}


def _padded_case(G: FiniteGroup, rng: np.random.Generator) -> GradientCase:
    window = PaddedWindow.box([int(rng.integers(3, 7))] * int(rng.integers(1, 3)), radius=1)
    phi = rng.normal(size=len(window.support))
    psi = rng.normal(size=(2, len(window.x_in)))
    dy = rng.normal(size=psi.shape)
    dphi, dpsi = padded_conv_backward(window, phi, psi, dy)

    def loss() -> float:
        return float(np.sum(dy * padded_conv_forward(window, phi, psi)))

    return loss, {"phi": (phi, dphi), "psi": (psi, dpsi)}


def _homspace_case(G: FiniteGroup, rng: np.random.Generator) -> GradientCase:
    space = homogeneous_space(G, _random_subgroup(G, rng))
    layer = HomSpaceConvLayer.create(space, 2, 2, k=1, rng=rng)
    f = rng.normal(size=(2, 2, space.size))
    dy = rng.normal(size=(2, 2, space.size))
    dweights, df = homspace_conv_backward(layer, f, dy)

    def loss() -> float:
        return float(np.sum(dy * homspace_conv_forward(layer, f)))

    return loss, {"f": (f, df), "weights": (layer.weights, dweights)}


def _prelu_case(G: FiniteGroup, rng: np.random.Generator) -> GradientCase:
    block = PReLUBlock(2, G, slope=float(rng.uniform(0.05, 0.5)))
    x = rng.normal(size=(2, 2, G.order))
    dy = rng.normal(size=x.shape)
    _, cache = block.forward(x)
    dx, grads = block.backward(cache, dy)
    return (lambda: float(np.sum(dy * block.forward(x)[0]))), {
        "x": (x, dx),
        "slope": (block.slope, grads["slope"]),
    }


def _readout_case(G: FiniteGroup, rng: np.random.Generator) -> GradientCase:
    block = ReadoutBlock(2, G.order, 3, rng)
    block.bias[...] = rng.normal(size=block.bias.shape)
    x = rng.normal(size=(2, 2, G.order))
    dy = rng.normal(size=(2, 3))
    _, cache = block.forward(x)
    dx, grads = block.backward(cache, dy)
    return (lambda: float(np.sum(dy * block.forward(x)[0]))), {
        "x": (x, dx),
        "weights": (block.weights, grads["weights"]),
        "bias": (block.bias, grads["bias"]),
    }


GRADIENT_CASES: dict[str, Callable[[FiniteGroup, np.random.Generator], GradientCase]] = {
    "conv": lambda G, rng: _conv_case(G, rng, None),
    "conv_full": lambda G, rng: _conv_case(G, rng, ErrorMode.FULL),
    "conv_ldr": lambda G, rng: _conv_case(G, rng, ErrorMode.LDR),
    "stride": _stride_case,
    "pool_mean": lambda G, rng: _pool_case(G, rng, PoolMode.MEAN),
    "pool_max": lambda G, rng: _pool_case(G, rng, PoolMode.MAX),
    "padded": _padded_case,
    "homspace": _homspace_case,
    "prelu": _prelu_case,
    "readout": _readout_case,
}


def check_gradcheck(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """Every backward pass against central finite differences, cycling over layer kinds."""
    result = SuiteResult("gradcheck", G.name, options.trials, options.seed)
    kinds = list(GRADIENT_CASES)
    worst: dict[str, float] = {}
    for t in range(options.trials):
        kind = kinds[t % len(kinds)]
        loss, pairs = GRADIENT_CASES[kind](G, _trial_rng(options.seed, t))
        for name, (array, analytic) in pairs.items():
            error = relative_error(numerical_gradient(loss, array), analytic)
            worst[kind] = max(worst.get(kind, 0.0), error)
            if error > GRADIENT_TOL:
                result.fail(t, f"{kind}: gradient of {name} off by {error:.3g}")
    result.details = {"max_relative_error": worst}
    return result


def _brute_force_conv(G: FiniteGroup, phi: np.ndarray, x: np.ndarray) -> np.ndarray:
    """out[b, o, h] = sum_i sum_g phi[o, i, g] x[b, i, g^-1 h], one element pair at a time."""
    out = np.zeros((x.shape[0], phi.shape[0], G.order))
    for h in G.elements():
        for g in G.elements():
            out[:, :, h] += x[:, :, G.mul(G.inv(g), h)] @ phi[:, :, g].T
    return out


def check_equiv(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """Error-free GM convolutions commute with translations and match the direct double sum."""
    result = SuiteResult("equiv", G.name, options.trials, options.seed)
    worst_equiv = 0.0
    worst_oracle = 0.0
    for t in range(options.trials):
        rng = _trial_rng(options.seed, t)
        k = int(rng.integers(0, min(2, G.diameter) + 1))
        in_channels, out_channels = (int(c) for c in rng.integers(1, 3, size=2))
        layer = GMConvLayer.create(G, in_channels, out_channels, k=k, rng=rng)
        x = rng.normal(size=(2, layer.in_channels, G.order))
        y = gmconv_forward(layer, x)
        phi = np.zeros((layer.out_channels, layer.in_channels, G.order))
        phi[:, :, layer.support] = layer.weights
        oracle = _brute_force_conv(G, phi, x)
        oracle_err = float(np.linalg.norm(y - oracle)) / max(float(np.linalg.norm(oracle)), 1e-12)
        equiv_err = 0.0
        for a in G.elements():
            act = translation_action(G, a)
            deviation = np.abs(gmconv_forward(layer, act(x)) - act(y)).max()
            equiv_err = max(equiv_err, float(deviation))
        worst_equiv = max(worst_equiv, equiv_err)
        worst_oracle = max(worst_oracle, oracle_err)
        if equiv_err > 1e-10 or oracle_err > 1e-12:
            result.fail(
                t,
                f"equivariance deviation {equiv_err:.3g}, oracle relative error {oracle_err:.3g}",
                x=x.reshape(-1, G.order),
                y=y.reshape(-1, G.order),
            )
    result.details = {"max_equivariance_deviation": worst_equiv, "max_oracle_error": worst_oracle}
    return result


def check_displacement(G: FiniteGroup, options: CheckOptions) -> SuiteResult:
    """
    D(M) = 0 exactly for group matrices and not for perturbed ones; D and D_P agree
    on dimension; LDR builds hit their rank.
    """
    result = SuiteResult("displacement", G.name, options.trials, options.seed)
    for t in range(options.trials):
        rng = _trial_rng(options.seed, t)
        M = densify(gm_from_coeffs(G, rng.normal(size=G.order)))
        perturbed = M.copy()
        if G.order > 1:
            i, j = rng.integers(G.order, size=2)
            perturbed[i, j] += rng.choice([-1.0, 1.0]) * rng.uniform(0.1, 1.0)
        exact_ok = displacement_d(f_of(M, G)).rank == 0 and is_group_matrix(M, G).is_group_matrix
        moved_ok = G.order == 1 or (
            displacement_d(f_of(perturbed, G)).rank > 0
            and not is_group_matrix(perturbed, G).is_group_matrix
        )
        family = PermutationFamily.random(G.order, rng)
        family_ok = displacement_d_family(f_of(M, G), family).rank == 0 and (
            G.order == 1 or displacement_d_family(f_of(perturbed, G), family).rank > 0
        )
        if not (exact_ok and moved_ok and family_ok):
            result.fail(
                t, "displacement does not characterize group matrices", M=M, perturbed=perturbed
            )
        if G.order > 2:
            r = int(rng.integers(1, min(3, G.order - 1) + 1))
            positions = tuple(int(p) for p in rng.choice(G.order, size=r, replace=False))
            a_vectors = rng.normal(size=(r, G.order))
            kernel = LDRKernel(G, rng.normal(size=G.order), a_vectors, positions)
            rank = displacement_d(f_of(ldr_build(kernel, check=False), G)).rank
            if rank != numerical_rank(kernel.a_vectors).rank:
                result.fail(t, f"LDR rank {rank} differs from span of {r} vectors")
    if 1 < G.order:
        for r in range(1, min(3, G.order - 1) + 1):
            dim = displacement_dimension(ldr_class_basis(G, list(range(r))), G)
            result.details[f"ldr_dim_r{r}"] = dim
            if dim != G.order * r:
                result.fail(options.trials, f"LDR class dimension {dim} != {G.order * r}")
    return result


SUITES: dict[str, Callable[[FiniteGroup, CheckOptions], SuiteResult]] = {
    "closure": check_closure,
    "distance": check_distance,
    "dimension": check_dimension,
    "restriction": check_restriction,
    "padding": check_padding,
    "gradcheck": check_gradcheck,
    "equiv": check_equiv,
    "displacement": check_displacement,
}

# Short names for the suites as listed in the command reference.
SUITE_ALIASES: dict[str, str] = {
    "prop1": "closure",
    "prop2": "distance",
    "prop3": "dimension",
    "lemma1": "restriction",
    "ddim": "padding",
}


def resolve_suite(name: str) -> str:
    """
    Canonical suite name for ``name`` or one of its aliases.

    Raises:
        ConfigError: If the name is unknown.
    """
    name = SUITE_ALIASES.get(name, name)
    if name not in SUITES:
        known = ", ".join([*SUITES, *SUITE_ALIASES])
        raise ConfigError(f"unknown suite {name!r}; choose from {known}")
    return name


def run_suite(name: str, group: FiniteGroup, options: CheckOptions | None = None) -> SuiteResult:
    """
    Run one suite (by name or alias) and record the outcome under its canonical name.

    Raises:
        ConfigError: If the suite name is unknown.
    """
    name = resolve_suite(name)
    options = options or CheckOptions()
    result = SUITES[name](group, options)
    get_recorder().log_check(
        name,
        result.passed,
        result.trials,
        result.failures,
        {"group": group.name, "seed": options.seed, "skipped": result.skipped},
    )
    return result


def dump_counterexamples(result: SuiteResult, out_dir: str | Path) -> list[Path]:
    """
    Write ``<out>/<suite>/trial-<t>/`` with one GMAT per matrix and ``case.json``.

    The JSON records the suite, group, seed and trial: rerunning the suite with the
    same seed regenerates exactly these inputs.
    """
    written = []
    for case in result.counterexamples:
        case_dir = Path(out_dir) / result.suite / f"trial-{case.trial}"
        files = {
            name: write_gmat(case_dir / f"{name}.gmat", np.atleast_2d(matrix)).name
            for name, matrix in case.matrices.items()
        }
        description = case_dir / "case.json"
        description.parent.mkdir(parents=True, exist_ok=True)
        description.write_text(
            json.dumps(
                {
                    "suite": result.suite,
                    "group": result.group,
                    "seed": result.seed,
                    "trial": case.trial,
                    "rng_seed": [result.seed, case.trial],
                    "description": case.description,
                    "matrices": files,
                    **case.extra,
                },
                indent=2,
                default=json_default,
            ),
            encoding="utf-8",
        )
        written.append(description)
    return written
