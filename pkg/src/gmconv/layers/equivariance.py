"""Group actions on signals and the normalized equivariance error."""

from __future__ import annotations

from collections.abc import Callable, Iterable, Sequence

import numpy as np

from gmconv.exceptions import ShapeError
from gmconv.groups import FiniteGroup
from gmconv.layers.padding import Lattice, PaddedWindow

Action = Callable[[np.ndarray], np.ndarray]

EPS = 1e-12


def translation_action(G: FiniteGroup, a: int) -> Action:
    """
    x -> (h -> x[h a]) on the last axis.

    This is the permutation that commutes with every group matrix; on abelian
    groups it is ordinary translation.
    """
    perm = G.mul_table[:, G.check_element(a)].astype(np.intp)
    return lambda x: np.asarray(x)[..., perm]


def translation_actions(G: FiniteGroup) -> list[Action]:
    return [translation_action(G, a) for a in G.elements()]


def identity_action(x: np.ndarray) -> np.ndarray:
    return np.asarray(x)


def window_shift_action(window: PaddedWindow, shift: Sequence[int] | int) -> Action:
    """
    (T_t psi)(x) = psi(x - t) inside the window, zero where x - t falls outside.

    An integer shift on a lattice window is read as a shift along Z.

    Raises:
        ShapeError: If a lattice shift does not match the lattice dimension.
    """
    lat = window.lattice
    if isinstance(shift, Sequence):
        shift = tuple(shift)
    elif isinstance(lat, Lattice):
        shift = (shift,)
    if isinstance(lat, Lattice) and len(shift) != lat.dim:
        raise ShapeError(f"shift {shift} does not match lattice dimension {lat.dim}")
    t = lat.inv(shift)
    position = {x: i for i, x in enumerate(window.x_in)}
    source = np.asarray([position.get(lat.mul(t, x), -1) for x in window.x_in], dtype=np.intp)
    valid = source >= 0

    def act(psi: np.ndarray) -> np.ndarray:
        psi = np.asarray(psi, dtype=float)
        out = np.zeros_like(psi)
        out[..., valid] = psi[..., source[valid]]
        return out

    return act


def equivariance_error(
    fn: Callable[[np.ndarray], np.ndarray],
    actions: Sequence[Action],
    samples: Iterable[np.ndarray],
    output_actions: Sequence[Action] | None = None,
    eps: float = EPS,
) -> float:
    """
    Mean of |f(g.x) - g.f(x)| / max(|f(g.x)|, eps) over samples and actions.

    ``output_actions`` defaults to ``actions`` (same index set on both sides).
    """
    out_actions = actions if output_actions is None else output_actions
    if len(out_actions) != len(actions):
        raise ShapeError("need one output action per input action")
    errors = []
    for x in samples:
        fx = fn(x)
        for act_in, act_out in zip(actions, out_actions, strict=True):
            lhs = fn(act_in(x))
            rhs = act_out(fx)
            errors.append(float(np.linalg.norm(lhs - rhs)) / max(float(np.linalg.norm(lhs)), eps))
    return float(np.mean(errors)) if errors else 0.0
