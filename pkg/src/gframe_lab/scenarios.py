"""Fixture builders, seeded random scenarios, and the scenario file format.

Random draws use numpy's PCG64 bit generator (``numpy.random.default_rng``)
seeded with the integer recorded in every scenario.  Scenario files are
JSON documents; every float is written with ``float.hex`` so a load/save
round trip is bit-exact.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .controlled import Controller
from .errors import BadControllers, FormatError
from .gframe import GFrameFamily, frame_operator
from .measure import DiscretizedMeasureSpace, uniform_interval_space

FORMAT_NAME = "gframe-lab-scenario"
FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class Scenario:
    space: DiscretizedMeasureSpace
    lambda_family: GFrameFamily
    P: Controller
    Q: Controller
    seed: int = 0
    label: str = ""
    gamma_family: GFrameFamily | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        n = self.lambda_family.ambient_dim
        if not self.lambda_family.space.same_as(self.space):
            raise ValueError("lambda family does not live on the scenario's space")
        if self.gamma_family is not None:
            if not self.gamma_family.space.same_as(self.space) or self.gamma_family.ambient_dim != n:
                raise ValueError("gamma family is inconsistent with the scenario")
        if self.P.dim != n or self.Q.dim != n:
            raise BadControllers(f"controllers must be {n} x {n}")

    @property
    def n(self) -> int:
        return self.lambda_family.ambient_dim

    def with_gamma(self, gamma: GFrameFamily | None, label: str | None = None) -> "Scenario":
        return Scenario(self.space, self.lambda_family, self.P, self.Q, self.seed,
                        self.label if label is None else label, gamma, dict(self.params))

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (
            self.space == other.space
            and self.lambda_family == other.lambda_family
            and self.P == other.P
            and self.Q == other.Q
            and self.seed == other.seed
            and self.label == other.label
            and self.params == other.params
            and (self.gamma_family is None) == (other.gamma_family is None)
            and (self.gamma_family is None or self.gamma_family == other.gamma_family)
        )

    __hash__ = None


def _controller(M, n: int, name: str) -> Controller:
    if M is None:
        return Controller.identity(n)
    if isinstance(M, Controller):
        C = M
    else:
        try:
            C = Controller(np.asarray(M))
        except ValueError as exc:
            raise BadControllers(f"{name}: {exc}") from exc
    if C.dim != n:
        raise BadControllers(f"{name} must be {n} x {n}, got {C.dim} x {C.dim}")
    return C


def example_1_5(N: int, P=None, Q=None) -> Scenario:
    """Lambda_w f = f_1 cos w + f_2 sin w on N midpoint nodes of [0, 2 pi]."""
    if N < 2:
        raise ValueError("need N >= 2 nodes")
    Pc = _controller(P, 2, "P")
    Qc = _controller(Q, 2, "Q")
    space = uniform_interval_space(0.0, 2.0 * math.pi, N, 1)
    blocks = tuple(np.array([[math.cos(w), math.sin(w)]]) for w in space.coordinates)
    fam = GFrameFamily(space, 2, blocks)
    return Scenario(space, fam, Pc, Qc, 0, f"example15-N{N}", params={"preset": "example15", "nodes": N})


def _complex_gaussian(rng: np.random.Generator, shape) -> np.ndarray:
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / math.sqrt(2.0)


def random_gframe(n: int, dims, weights=None, seed: int = 0) -> GFrameFamily:
    """Blocks drawn from a standard complex Gaussian; unit weights unless given."""
    dims = tuple(int(d) for d in dims)
    if n < 1 or not dims or min(dims) < 1:
        raise ValueError("need n >= 1 and positive block dimensions")
    rng = np.random.default_rng(seed)
    w = np.ones(len(dims)) if weights is None else np.asarray(weights, dtype=float)
    space = DiscretizedMeasureSpace(w, dims)
    return GFrameFamily(space, n, tuple(_complex_gaussian(rng, (d, n)) for d in dims))


def random_unitary(rng: np.random.Generator, n: int) -> np.ndarray:
    Z = _complex_gaussian(rng, (n, n))
    Qm, R = np.linalg.qr(Z)
    d = np.diag(R)
    return Qm * (d / np.abs(d))


def random_controller(n: int, condition_target: float = 10.0, seed: int = 0, commuting_with=None) -> Controller:
    """V D V^* with D log-uniform in [1, condition_target].

    ``commuting_with``: use the eigenvectors of this Hermitian matrix as V,
    which makes the controller commute with it.
    """
    if n < 1 or condition_target < 1:
        raise ValueError("need n >= 1 and condition_target >= 1")
    rng = np.random.default_rng(seed)
    D = np.exp(rng.uniform(0.0, math.log(condition_target), n))
    if commuting_with is not None:
        M = np.asarray(commuting_with, dtype=np.complex128)
        _, V = np.linalg.eigh(0.5 * (M + M.conj().T))
    else:
        V = random_unitary(rng, n)
    M = (V * D) @ V.conj().T
    return Controller(0.5 * (M + M.conj().T))


CONTROLLER_KINDS = ("independent", "equal", "commuting", "p_commuting", "identity")


def random_scenario(seed: int, n: int | None = None, dims=None, cond: float = 100.0,
                    controllers: str = "independent", max_nodes: int = 16) -> Scenario:
    """A redundant random frame (sum d_w >= n) with controllers of the requested kind.

    ``independent``: unrelated P, Q.  ``equal``: Q = P.  ``commuting``: P and Q
    share S_Lambda's eigenbasis.  ``p_commuting``: P shares that basis, Q = I.
    ``identity``: P = Q = I.
    """
    if controllers not in CONTROLLER_KINDS:
        raise ValueError(f"unknown controller kind {controllers!r}")
    rng = np.random.default_rng(seed)
    if n is None:
        n = int(rng.integers(2, 7))
    if dims is None:
        nodes = int(rng.integers(max(2, n // 3 + 1), max_nodes + 1))
        dims = [int(d) for d in rng.integers(1, 4, nodes)]
        while sum(dims) < n:
            dims[int(rng.integers(len(dims)))] += 1
    dims = tuple(int(d) for d in dims)
    weights = rng.uniform(0.25, 2.0, len(dims))
    sub = [int(s) for s in rng.integers(0, 2**62, 3)]
    fam = random_gframe(n, dims, weights, sub[0])
    S = frame_operator(fam)
    if controllers == "independent":
        P = random_controller(n, cond, sub[1])
        Q = random_controller(n, cond, sub[2])
    elif controllers == "equal":
        P = random_controller(n, cond, sub[1])
        Q = P
    elif controllers == "commuting":
        P = random_controller(n, cond, sub[1], commuting_with=S)
        Q = random_controller(n, cond, sub[2], commuting_with=S)
    elif controllers == "p_commuting":
        P = random_controller(n, cond, sub[1], commuting_with=S)
        Q = Controller.identity(n)
    else:
        P = Q = Controller.identity(n)
    params = {"preset": "random", "n": n, "blocks": list(dims), "cond": float(cond), "controllers": controllers}
    return Scenario(fam.space, fam, P, Q, int(seed), f"random-{controllers}-n{n}-s{seed}", params=params)


def diag_example() -> Scenario:
    """Two nodes, Lambda_1 = [1 0], Lambda_2 = [0 1], P = diag(2,1), Q = diag(3,1)."""
    space = DiscretizedMeasureSpace(np.ones(2), (1, 1))
    fam = GFrameFamily(space, 2, (np.array([[1.0, 0.0]]), np.array([[0.0, 1.0]])))
    return Scenario(space, fam, Controller(np.diag([2.0, 1.0])), Controller(np.diag([3.0, 1.0])), 0,
                    "diag-example", params={"preset": "diag"})


def rotation(theta: float) -> np.ndarray:
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, -s], [s, c]])


def noncommuting_fixture(theta: float = math.pi / 6) -> Scenario:
    """S_Lambda = diag(1, 4), P = R diag(4, 1) R^T (rotated), Q = I.

    P and Q commute, so (PQ)^(1/2) exists, but P does not commute with
    S_Lambda; every proof step that swaps P past S_Lambda is visibly off.
    """
    space = DiscretizedMeasureSpace(np.ones(2), (1, 1))
    fam = GFrameFamily(space, 2, (np.array([[1.0, 0.0]]), np.array([[0.0, 2.0]])))
    R = rotation(theta)
    P = Controller(R @ np.diag([4.0, 1.0]) @ R.T)
    return Scenario(space, fam, P, Controller.identity(2), 0, "noncommuting-2x2",
                    params={"preset": "noncommuting", "theta": theta})


def rank_deficient_fixture(n: int = 3, nodes: int = 4, seed: int = 0) -> Scenario:
    """Random blocks whose first column is zero, so every Lambda_w kills e_1."""
    rng = np.random.default_rng(seed)
    space = DiscretizedMeasureSpace(rng.uniform(0.5, 1.5, nodes), (2,) * nodes)
    blocks = []
    for _ in range(nodes):
        B = _complex_gaussian(rng, (2, n))
        B[:, 0] = 0.0
        blocks.append(B)
    fam = GFrameFamily(space, n, tuple(blocks))
    I = Controller.identity(n)
    return Scenario(space, fam, I, I, int(seed), f"rank-deficient-n{n}", params={"preset": "rank_deficient"})


# ---------------------------------------------------------------- file format

def _hex_list(a) -> list[str]:
    return [float(x).hex() for x in np.asarray(a, dtype=np.float64).reshape(-1)]


def _encode_matrix(M) -> dict:
    M = np.asarray(M, dtype=np.complex128)
    return {"shape": list(M.shape), "re": _hex_list(M.real), "im": _hex_list(M.imag)}


def _floats(items) -> np.ndarray:
    try:
        return np.array([float.fromhex(s) for s in items], dtype=np.float64)
    except (TypeError, ValueError) as exc:
        raise FormatError(f"bad hexadecimal float: {exc}") from exc


def _decode_matrix(obj) -> np.ndarray:
    try:
        r, c = (int(x) for x in obj["shape"])
        re = _floats(obj["re"])
        im = _floats(obj["im"])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"bad matrix entry: {exc}") from exc
    if re.size != r * c or im.size != r * c:
        raise FormatError(f"matrix data does not match shape {(r, c)}")
    return (re + 1j * im).reshape(r, c)


def scenario_to_dict(s: Scenario) -> dict:
    sp = s.space
    return {
        "format": FORMAT_NAME,
        "version": FORMAT_VERSION,
        "label": s.label,
        "seed": int(s.seed),
        "params": s.params,
        "space": {
            "nodes": list(sp.nodes),
            "weights": _hex_list(sp.weights),
            "block_dims": list(sp.block_dims),
            "coordinates": None if sp.coordinates is None else _hex_list(sp.coordinates),
        },
        "ambient_dim": s.n,
        "lambda": [_encode_matrix(B) for B in s.lambda_family.blocks],
        "gamma": None if s.gamma_family is None else [_encode_matrix(B) for B in s.gamma_family.blocks],
        "P": _encode_matrix(s.P.matrix),
        "Q": _encode_matrix(s.Q.matrix),
    }


def scenario_from_dict(d: dict) -> Scenario:
    if not isinstance(d, dict) or d.get("format") != FORMAT_NAME:
        raise FormatError("not a gframe-lab scenario document")
    if d.get("version") != FORMAT_VERSION:
        raise FormatError(f"unsupported scenario version {d.get('version')!r}; expected {FORMAT_VERSION}")
    try:
        sp = d["space"]
        coords = sp.get("coordinates")
        space = DiscretizedMeasureSpace(
            weights=_floats(sp["weights"]),
            block_dims=tuple(int(x) for x in sp["block_dims"]),
            nodes=tuple(int(x) for x in sp["nodes"]),
            coordinates=None if coords is None else _floats(coords),
        )
        n = int(d["ambient_dim"])
        lam = GFrameFamily(space, n, tuple(_decode_matrix(B) for B in d["lambda"]))
        gam = None
        if d.get("gamma") is not None:
            gam = GFrameFamily(space, n, tuple(_decode_matrix(B) for B in d["gamma"]))
        return Scenario(space, lam, Controller(_decode_matrix(d["P"])), Controller(_decode_matrix(d["Q"])),
                        int(d["seed"]), str(d["label"]), gam, dict(d.get("params") or {}))
    except FormatError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed scenario: {exc}") from exc


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=1, sort_keys=True) + "\n"


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8")


def load_scenario(path) -> Scenario:
    text = Path(path).read_text(encoding="utf-8")
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{path}: not valid JSON ({exc.msg})") from exc
    return scenario_from_dict(d)
