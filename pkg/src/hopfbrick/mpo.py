"""Transfer-matrix engine: every exactly contracted quantity of the circuits.

Triangle / diamond / inverted-triangle operator networks as bond-d_A matrix
products, Heisenberg-picture observable MPOs (bond d_A^2 at any time),
quench expectation values and equal-time correlators, Renyi entropies in
three regimes (small subsystem, replica transfer matrices, semi-infinite),
equilibration rates, normalized projector-trace spatiotemporal correlators
and OTOCs, and the periodic-chain evolution operator at its special times.

Time bookkeeping: one period applies the odd then the even gate layer, so a
Heisenberg operator at time t spans 2t column pairs (t in half-integers).
An operator at position x sits on a v-leg when x - t is an integer (integer
positions are v-sites of the t = 0 lattice), on a rho-leg otherwise.

Normalized-trace convention: infinite-chain traces (spatiotemporal
correlator, OTOC) divide by the same projector-channel contraction without
operator insertions, so C(1,1,x,t) = F(1,1,x,t) = 1 exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra import canonical_power, exponent, tier_chain
from .tensors import SolvableTensorSet, build_projectors

TOL_NUM = 1e-9
EIG_DENSE_CAP = 400
POWER_ITER_TOL = 1e-12
POWER_ITER_CAP = 10 ** 5


def leg_of(x, t) -> str:
    """Leg type of an operator at position x and time t (half-integer grid)."""
    return "v" if abs((x - t) - round(x - t)) < 1e-9 else "rho"


def _half_steps(t) -> int:
    n = int(round(2 * t))
    if abs(2 * t - n) > 1e-12 or n < 0:
        raise ValueError(f"time {t} must be a non-negative multiple of 1/2")
    return n


def _einsum_chain(operands, wiring, out):
    args = []
    for op, w in zip(operands, wiring):
        args += [op, w]
    args.append(out)
    return np.einsum(*args, optimize=True)


# -- states -------------------------------------------------------------------------


@dataclass
class MPSState:
    """Translation-invariant two-site-cell MPS (product states have bond 1).

    Site tensors carry (physical, left bond, right bond); the unit cell is
    (rho-site, v-site).  Environments are the principal left/right fixed
    points of the cell transfer matrix, rescaled so the leading eigenvalue
    is one and <L|R> = 1.
    """

    rho_site: np.ndarray
    v_site: np.ndarray
    translation_invariant: bool = True
    _env: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        self.rho_site = np.asarray(self.rho_site, dtype=complex)
        self.v_site = np.asarray(self.v_site, dtype=complex)

    @classmethod
    def product(cls, rho_vec, v_vec):
        r = np.asarray(rho_vec, dtype=complex).reshape(-1, 1, 1)
        v = np.asarray(v_vec, dtype=complex).reshape(-1, 1, 1)
        return cls(rho_site=r / np.linalg.norm(r), v_site=v / np.linalg.norm(v))

    @property
    def bond_dim(self):
        return self.rho_site.shape[1]

    def site_transfer(self, which):
        A = self.rho_site if which == "rho" else self.v_site
        return np.einsum("pmn,pMN->mMnN", A, A.conj()).reshape(
            A.shape[1] ** 2, A.shape[2] ** 2)

    def environments(self):
        if self._env is None:
            E = self.site_transfer("rho") @ self.site_transfer("v")
            vals, vecs = np.linalg.eig(E)
            k = int(np.argmax(np.abs(vals)))
            lam = vals[k]
            if abs(lam - 1.0) > 1e-12:
                s = np.abs(lam) ** (-0.25)
                ph = (lam / np.abs(lam)) ** (-0.25)
                self.rho_site = self.rho_site * s * ph
                self.v_site = self.v_site * s * ph
                self._env = None
                return self.environments()
            right = vecs[:, k]
            wl, vl = np.linalg.eig(E.T)
            left = vl[:, int(np.argmax(np.abs(wl)))]
            left = left / (left @ right)
            self._env = (left, right)
        return self._env

    def pair_rdm(self, first, second):
        """Normalized two-site reduced density matrix of adjacent sites."""
        lam_l, lam_r = self.environments()
        D = self.bond_dim
        L = lam_l.reshape(D, D)
        R = lam_r.reshape(D, D)
        T = np.einsum("mM,pmn,PMN->pPnN", L, first, first.conj())
        T = np.einsum("pPnN,qnk,QNK->pqPQkK", T, second, second.conj())
        rdm = np.einsum("pqPQkK,kK->pqPQ", T, R)
        d1, d2 = first.shape[0], second.shape[0]
        rdm = rdm.reshape(d1 * d2, d1 * d2)
        return rdm / np.trace(rdm)

    def check_projector_invariance(self, pair, tol=TOL_NUM) -> float:
        """Residual of the solvable-subspace membership, checked on a window."""
        if "bialgebra" in tier_chain(pair.algebra.tier):
            return 0.0
        pp = build_projectors(pair)
        rdm_vr = self.pair_rdm(self.v_site, self.rho_site)
        rdm_rv = self.pair_rdm(self.rho_site, self.v_site)
        res = abs(1.0 - np.trace(pp.P @ rdm_vr).real) + \
            abs(1.0 - np.trace(pp.Q @ rdm_rv).real)
        return float(res)


# -- transfer matrices ---------------------------------------------------------------


class TransferStack:
    """Column transfer matrices of one model/state combination.

    Virtual layout per cut: (ket A-bond, bra A-bond, ket psi-bond, bra
    psi-bond), flattened.  K_L carries (counit, conj counit, Lambda_L) and
    pairs with output slots; K_R carries (unit, conj unit, Lambda_R).
    """

    def __init__(self, ts: SolvableTensorSet, state: MPSState):
        self.ts = ts
        self.state = state
        lam_l, lam_r = state.environments()
        d = ts.algebra.dim
        Dpsi = state.bond_dim
        self.dim = d * d * Dpsi * Dpsi
        R, V = ts.rho_tensor, ts.v_tensor
        Ar, Av = state.rho_site, state.v_site
        # open columns [bra-down, ket-up, left(out) group, right(arg) group]
        self._open = {
            "rho": np.einsum("apxy,pmn,BqXY,qMN->BayYmMxXnN", R, Ar,
                             R.conj(), Ar.conj(), optimize=True
                             ).reshape(ts.d_rho, ts.d_rho, self.dim, self.dim),
            "v": np.einsum("ipxy,pmn,JqXY,qMN->JiyYmMxXnN", V, Av,
                           V.conj(), Av.conj(), optimize=True
                           ).reshape(ts.d_v, ts.d_v, self.dim, self.dim),
        }
        eps, u = ts.counit_vec, ts.unit_vec
        lamL = lam_l.reshape(Dpsi, Dpsi)
        lamR = lam_r.reshape(Dpsi, Dpsi)
        self.K_L = np.einsum("y,Y,mM->yYmM", eps, eps.conj(), lamL).reshape(-1)
        self.K_R = np.einsum("x,X,nN->xXnN", u, u.conj(), lamR).reshape(-1)
        self._swap = None

    def T_open(self, kind):
        return self._open[kind]

    def T(self, kind, op=None):
        col = self._open[kind]
        if op is None:
            return np.einsum("aaLR->LR", col)
        return np.einsum("Ba,BaLR->LR", np.asarray(op, dtype=complex), col)

    def T_rho(self, op=None):
        return self.T("rho", op)

    def T_v(self, op=None):
        return self.T("v", op)

    def swap_matrix(self):
        if self._swap is None:
            d = self.ts.algebra.dim
            Dpsi = self.state.bond_dim
            idx = np.arange(self.dim).reshape(d, d, Dpsi, Dpsi)
            perm = np.transpose(idx, (1, 0, 3, 2)).reshape(-1)
            S = np.zeros((self.dim, self.dim))
            S[np.arange(self.dim), perm] = 1.0
            self._swap = S
        return self._swap

    def T_primed(self, kind, op=None):
        S = self.swap_matrix()
        return S @ self.T(kind, op) @ S

    def cell(self):
        return self.T_rho() @ self.T_v()

    def normalization(self, t) -> complex:
        vec = self.K_R.copy()
        cell = self.cell()
        for _ in range(_half_steps(t)):
            vec = cell @ vec
        return complex(self.K_L @ vec)


# -- operator-shape MPOs ----------------------------------------------------------------


def mpo_triangle(ts: SolvableTensorSet, n: int) -> np.ndarray:
    """Dense triangular operator from the bond-d_A matrix product.

    Output axes: (a1, i1, ..., an, in, b1, j1, ..., bn, jn).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    R, V = ts.rho_tensor, ts.v_tensor
    lab = [0]

    def new():
        lab[0] += 1
        return lab[0]

    ext = {name: {k: new() for k in range(1, n + 1)} for name in "aibj"}
    operands, wiring = [ts.counit_vec], [[new()]]
    bond = wiring[0][0]
    for k in range(1, n + 1):
        nxt = new()
        operands.append(R)
        wiring.append([ext["a"][k], ext["b"][k], nxt, bond])   # [a,b,arg,out]
        bond = nxt
        nxt = new()
        operands.append(V)
        wiring.append([ext["i"][k], ext["j"][k], nxt, bond])
        bond = nxt
    operands.append(ts.unit_vec)
    wiring.append([bond])
    out = []
    for k in range(1, n + 1):
        out += [ext["a"][k], ext["i"][k]]
    for k in range(1, n + 1):
        out += [ext["b"][k], ext["j"][k]]
    return _einsum_chain(operands, wiring, out)


def mpo_diamond_power(ts: SolvableTensorSet, n: int, k: int = 1) -> np.ndarray:
    """k-th matrix power of the diamond operator via canonical-element powers.

    Matrix with rows (a-block, i-block), columns (b-block, j-block).
    """
    if n < 1 or k < 1:
        raise ValueError("n, k must be >= 1")
    ck = canonical_power(ts.algebra, k).coeffs
    R, V = ts.rho_tensor, ts.v_tensor
    lab = [0]

    def new():
        lab[0] += 1
        return lab[0]

    ext = {name: {kk: new() for kk in range(1, n + 1)} for name in "aibj"}
    operands, wiring = [ts.counit_vec], [[new()]]
    bond = wiring[0][0]
    for kk in range(1, n + 1):
        nxt = new()
        operands.append(R)
        wiring.append([ext["a"][kk], ext["b"][kk], nxt, bond])
        bond = nxt
    x_free = bond
    y_free = new()
    bond = y_free
    for kk in range(1, n + 1):
        nxt = new()
        operands.append(V)
        wiring.append([ext["i"][kk], ext["j"][kk], nxt, bond])
        bond = nxt
    operands.append(ts.unit_vec)
    wiring.append([bond])
    operands.append(ck)
    wiring.append([x_free, y_free])
    out = [ext["a"][kk] for kk in range(1, n + 1)] + [ext["i"][kk] for kk in range(1, n + 1)] \
        + [ext["b"][kk] for kk in range(1, n + 1)] + [ext["j"][kk] for kk in range(1, n + 1)]
    block = _einsum_chain(operands, wiring, out)
    dr, dv = ts.d_rho, ts.d_v
    return block.reshape(dr ** n * dv ** n, dr ** n * dv ** n)


def mpo_inverted_triangle(ts: SolvableTensorSet, n: int) -> np.ndarray:
    """Dense inverted-triangle operator from the primed matrix product.

    Output axes: (i1, a1, ..., in, an, j1, b1, ..., jn, bn).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    Rp, Vp = ts.rho_primed, ts.v_primed
    lab = [0]

    def new():
        lab[0] += 1
        return lab[0]

    ext = {name: {k: new() for k in range(1, n + 1)} for name in "aibj"}
    operands, wiring = [ts.unit_vec], [[new()]]
    bond = wiring[0][0]
    for k in range(1, n + 1):
        nxt = new()
        operands.append(Vp)
        wiring.append([ext["i"][k], ext["j"][k], bond, nxt])   # primed: arg fed from the left
        bond = nxt
        nxt = new()
        operands.append(Rp)
        wiring.append([ext["a"][k], ext["b"][k], bond, nxt])
        bond = nxt
    operands.append(ts.counit_vec)
    wiring.append([bond])
    out = []
    for k in range(1, n + 1):
        out += [ext["i"][k], ext["a"][k]]
    for k in range(1, n + 1):
        out += [ext["j"][k], ext["b"][k]]
    return _einsum_chain(operands, wiring, out)


# -- Heisenberg MPOs ----------------------------------------------------------------------


@dataclass
class HeisenbergMPO:
    """Two-row (ket/bra) MPO of a time-evolved single-site operator.

    Columns alternate rho, v over 2t pairs; the operator inserts on the last
    v column (v-leg) or the first rho column (rho-leg).  Bond dimension is
    d_A^2 at every cut, independent of t.
    """

    ts: SolvableTensorSet
    op: np.ndarray
    t: float
    leg: str
    position: float = 0.0

    def __post_init__(self):
        if _half_steps(self.t) < 1:
            raise ValueError("Heisenberg MPO needs t >= 1/2")
        d_phys = self.ts.d_v if self.leg == "v" else self.ts.d_rho
        self.op = np.asarray(self.op, dtype=complex)
        if self.op.shape != (d_phys, d_phys):
            raise ValueError("operator dimension does not match the leg type")

    @property
    def n_pairs(self):
        return _half_steps(self.t)

    @property
    def n_columns(self):
        return 2 * self.n_pairs

    @property
    def bond_dim(self):
        return self.ts.algebra.dim ** 2

    def support(self):
        """Column positions on the half-integer site grid."""
        start = self.position - self.t + (0.5 if self.leg == "v" else 0.0)
        return [start + 0.5 * k for k in range(self.n_columns)]

    def site_tensor(self, k):
        """Column k (0-based): [bond_left(out-side), bond_right(arg-side), out, in]."""
        ts = self.ts
        d = ts.algebra.dim
        if not 0 <= k < self.n_columns:
            raise IndexError("column out of range")
        kind = "rho" if k % 2 == 0 else "v"
        op = None
        if self.leg == "v" and k == self.n_columns - 1:
            op = self.op
        elif self.leg == "rho" and k == 0:
            op = self.op
        base = ts.rho_tensor if kind == "rho" else ts.v_tensor
        if op is None:
            W = np.einsum("apxy,AqXY,Aa->yYxXqp", base, base.conj(),
                          np.eye(base.shape[0]), optimize=True)
        else:
            W = np.einsum("apxy,AqXY,Aa->yYxXqp", base, base.conj(), op, optimize=True)
        dp = base.shape[1]
        return W.reshape(d * d, d * d, dp, dp)

    def boundary_left(self):
        eps = self.ts.counit_vec
        return np.einsum("y,Y->yY", eps, eps.conj()).reshape(-1)

    def boundary_right(self):
        u = self.ts.unit_vec
        return np.einsum("x,X->xX", u, u.conj()).reshape(-1)

    def to_dense(self):
        """Dense operator on the covered sites: axes (out_1.., in_1..), column order."""
        lab = [0]

        def new():
            lab[0] += 1
            return lab[0]

        operands, wiring = [self.boundary_left()], [[new()]]
        bond = wiring[0][0]
        outs, ins = [], []
        for k in range(self.n_columns):
            nxt, o, i = new(), new(), new()
            operands.append(self.site_tensor(k))
            wiring.append([bond, nxt, o, i])
            outs.append(o)
            ins.append(i)
            bond = nxt
        operands.append(self.boundary_right())
        wiring.append([bond])
        return _einsum_chain(operands, wiring, outs + ins)


def heisenberg_mpo(ts, O, t, leg=None, position=0.0) -> HeisenbergMPO:
    if leg is None:
        leg = leg_of(position, t)
    return HeisenbergMPO(ts=ts, op=np.asarray(O, dtype=complex), t=t,
                         leg=leg, position=position)


# -- quench expectation values ----------------------------------------------------------


def expectation(ts, O, t, state: MPSState, x=0.0, leg=None) -> complex:
    """<O_x(t)> in the quench from a translation-invariant state."""
    O = np.asarray(O, dtype=complex)
    if leg is None:
        leg = leg_of(x, t)
    n = _half_steps(t)
    lam_l, lam_r = state.environments()
    if n == 0:
        A = state.v_site if leg == "v" else state.rho_site
        D = state.bond_dim
        T_O = np.einsum("pmn,Qp,QMN->mMnN", A, O, A.conj()).reshape(D * D, D * D)
        T_1 = state.site_transfer("v" if leg == "v" else "rho")
        if leg == "v":
            lvec = lam_l @ state.site_transfer("rho")
            rvec = lam_r
        else:
            lvec = lam_l
            rvec = state.site_transfer("v") @ lam_r
        return complex((lvec @ T_O @ rvec) / (lvec @ T_1 @ rvec))
    st = TransferStack(ts, state)
    cell = st.cell()
    vec = st.K_R.copy()
    if leg == "v":
        vec = st.T_v(O) @ vec
        vec = st.T_rho() @ vec
        for _ in range(n - 1):
            vec = cell @ vec
    else:
        for _ in range(n - 1):
            vec = cell @ vec
        vec = st.T_v() @ vec
        vec = st.T_rho(O) @ vec
    return complex(st.K_L @ vec)


def two_point(ts, O, O2, x, t, state: MPSState, connected=False) -> complex:
    """<O_0(t) O2_{x+1/2}(t)>; O at integer site 0, O2 at site x + 1/2, t integer."""
    if int(round(t)) != t:
        raise ValueError("two_point is defined at integer times")
    if x < 0 or int(round(x)) != x:
        raise ValueError("x must be a non-negative integer")
    t, x = int(round(t)), int(round(x))
    O = np.asarray(O, dtype=complex)
    O2 = np.asarray(O2, dtype=complex)
    if t == 0:
        e1 = expectation(ts, O, 0, state, x=0.0)
        e2 = expectation(ts, O2, 0, state, x=x + 0.5)
        if x == 0:
            lam_l, lam_r = state.environments()
            D = state.bond_dim
            Tv = np.einsum("pmn,Qp,QMN->mMnN", state.v_site, O,
                           state.v_site.conj()).reshape(D * D, D * D)
            Tr = np.einsum("pmn,Qp,QMN->mMnN", state.rho_site, O2,
                           state.rho_site.conj()).reshape(D * D, D * D)
            num = lam_l @ state.site_transfer("rho") @ Tv @ Tr @ lam_r
            den = lam_l @ state.site_transfer("rho") @ state.site_transfer("v") \
                @ state.site_transfer("rho") @ lam_r
            val = complex(num / den)
        else:
            val = complex(e1 * e2)
        return val - e1 * e2 if connected else val
    st = TransferStack(ts, state)
    cell = st.cell()
    vec = st.K_R.copy()
    if x <= 2 * t - 1:
        for _ in range(x):
            vec = cell @ vec
        vec = st.T_v(O) @ vec
        cell_vr = st.T_v() @ st.T_rho()
        for _ in range(2 * t - x - 1):
            vec = cell_vr @ vec
        vec = st.T_rho(O2) @ vec
        for _ in range(x):
            vec = cell @ vec
    else:
        for _ in range(2 * t - 1):
            vec = cell @ vec
        vec = st.T_v() @ vec
        vec = st.T_rho(O2) @ vec
        for _ in range(x - 2 * t):
            vec = cell @ vec
        vec = st.T_v(O) @ vec
        vec = st.T_rho() @ vec
        for _ in range(2 * t - 1):
            vec = cell @ vec
    val = complex(st.K_L @ vec)
    if not connected:
        return val
    e1 = expectation(ts, O, t, state, x=0.0)
    e2 = expectation(ts, O2, t, state, x=x + 0.5)
    return val - e1 * e2


# -- Renyi entropies ---------------------------------------------------------------------


def _entropy_from_rdm(M, alpha) -> float:
    M = M / np.trace(M)
    vals = np.linalg.eigvalsh((M + M.conj().T) / 2)
    vals = np.clip(vals.real, 0.0, None)
    return float(np.log(float((vals ** alpha).sum())) / (1 - alpha))


def reduced_density_matrix(ts, state, l, t, memory_cap=2 ** 26) -> np.ndarray:
    """The rotated reduced density matrix of a 2l-qudit block (late time l <= 2t)."""
    n = _half_steps(t)
    dr, dv = ts.d_rho, ts.d_v
    if (dr * dv) ** (2 * l) > memory_cap:
        raise MemoryError("reduced density matrix exceeds the memory cap")
    if 2 * t < l:
        raise ValueError("matrix form only in the late-time regime l <= 2t")
    st = TransferStack(ts, state)
    D = st.dim
    open_rho = st.T_open("rho")        # [b, a, L, R]
    open_v = st.T_open("v")            # [j, i, L, R]
    Tv, Tr = st.T_v(), st.T_rho()
    left = st.K_L.reshape(1, D)
    for _ in range(l):
        left = np.einsum("oL,baLR->obaR", left, open_rho, optimize=True)
        left = left.reshape(-1, D) @ Tv
        left = left.reshape(-1, D)
    cell = st.cell()
    mid = np.linalg.matrix_power(cell, n - l)
    left = left @ mid
    right = st.K_R.reshape(D, 1)
    for _ in range(l):
        right = np.einsum("jiLR,Ro->Ljio", open_v, right.reshape(D, -1), optimize=True)
        right = Tr @ right.reshape(D, -1)
    block = left @ right.reshape(D, -1)
    # left legs: (b1, a1, ..., bl, al); right legs (outer to inner): (j_l, i_l, ..., j_1, i_1)
    M = block.reshape((dr, dr) * l + (dv, dv) * l)
    perm = [2 * k + 1 for k in range(l)]                                   # a_k
    perm += [2 * l + 2 * (l - 1 - k) + 1 for k in range(l)]                # i_k
    perm += [2 * k for k in range(l)]                                      # b_k
    perm += [2 * l + 2 * (l - 1 - k) for k in range(l)]                    # j_k
    M = np.transpose(M, perm)
    return M.reshape(dr ** l * dv ** l, dr ** l * dv ** l)


def renyi_small(ts, state, l, t, alpha, memory_cap=2 ** 26) -> float:
    """H_alpha of a 2l-qudit block via the explicit reduced density matrix."""
    if alpha < 2 or int(alpha) != alpha:
        raise ValueError("alpha must be an integer >= 2")
    if _half_steps(t) == 0:
        return 0.0
    if 2 * t < l:
        return _renyi_small_window(ts, state, l, t, alpha)
    M = reduced_density_matrix(ts, state, l, t, memory_cap)
    return _entropy_from_rdm(M, alpha)


def _renyi_small_window(ts, state, l, t, alpha) -> float:
    """Early-time branch: dense evolution of a lightcone-padded open window."""
    from . import oracle as orc

    if ts.d_rho != ts.d_v:
        raise ValueError("window fallback needs d_rho = d_v")
    if state.bond_dim != 1:
        raise ValueError("window fallback supports product states")
    pad_cells = int(np.ceil(t)) + 1
    n_sites = 2 * l + 4 * pad_cells
    circ = orc.DenseCircuit(L=(n_sites + 1) // 2, d=ts.d_rho, gate=ts.gate_matrix,
                            obc=True, sites=n_sites,
                            amplitude_cap=max(orc.DEFAULT_AMPLITUDE_CAP,
                                              ts.d_rho ** n_sites))
    rho_vec = state.rho_site.reshape(-1)
    v_vec = state.v_site.reshape(-1)
    site_vecs = [(v_vec if k % 2 == 0 else rho_vec) for k in range(n_sites)]
    psi = orc.product_state(circ, site_vecs)
    psit = orc.evolve(circ, psi, t)
    # the engine block starts on a rho leg of the time-t lattice: odd site at
    # integer t, even site after an odd number of layers
    offset = 2 * pad_cells + (1 if _half_steps(t) % 2 == 0 else 0)
    rdm = orc.reduced_density_matrix(circ, psit, 2 * l, offset=offset)
    return _entropy_from_rdm(rdm, alpha)


class ReplicaChannel:
    """Matrix-free application of the alpha-replica transfer operators.

    The virtual space has 2*alpha slots of dimension d_A (ket/bra pairs per
    replica; product states only).  Unprimed operators act replica-wise;
    primed ones are conjugated by the one-slot translation of the replica
    ring, realized as an index permutation.
    """

    def __init__(self, ts, state, alpha):
        if state.bond_dim != 1:
            raise ValueError("replica transfer matrices support product states")
        self.alpha = int(alpha)
        self.d = ts.algebra.dim
        st = TransferStack(ts, state)
        S = st.swap_matrix()
        self.base = {"rho": st.T_rho(), "v": st.T_v()}
        self.base_primed = {k: S @ m @ S for k, m in self.base.items()}
        self.kl_pair = np.kron(ts.counit_vec, ts.counit_vec.conj())
        self.kr_pair = np.kron(ts.unit_vec, ts.unit_vec.conj())

    def boundary(self, side):
        v = self.kl_pair if side == "L" else self.kr_pair
        out = v
        for _ in range(self.alpha - 1):
            out = np.kron(out, v)
        return out

    def _apply_pairwise(self, mat, vec):
        d2 = self.d * self.d
        v = vec.reshape((d2,) * self.alpha)
        for r in range(self.alpha):
            v = np.moveaxis(np.tensordot(mat, v, axes=([1], [r])), 0, r)
        return v.reshape(-1)

    def _translate(self, vec, inverse=False):
        v = vec.reshape((self.d,) * (2 * self.alpha))
        shift = 1 if inverse else -1
        order = [(k + shift) % (2 * self.alpha) for k in range(2 * self.alpha)]
        return np.transpose(v, order).reshape(-1)

    def apply(self, kind, vec, primed=False):
        if not primed:
            return self._apply_pairwise(self.base[kind], vec)
        v = self._translate(vec, inverse=True)
        v = self._apply_pairwise(self.base_primed[kind], v)
        return self._translate(v, inverse=False)


def _replica_trace(ch: ReplicaChannel, program) -> float:
    vec = ch.boundary("R")
    for kind, primed in reversed(program):
        vec = ch.apply(kind, vec, primed=primed)
    tr = complex(ch.boundary("L") @ vec)
    if abs(tr.imag) > TOL_NUM * max(1.0, abs(tr.real)):
        raise FloatingPointError(f"replica trace has imaginary part {tr.imag:.3e}")
    return tr.real


def renyi_replica(ts, state, l, t, alpha) -> float:
    """H_alpha via the replica transfer matrices (product initial states)."""
    if alpha < 2 or int(alpha) != alpha:
        raise ValueError("alpha must be an integer >= 2")
    n = _half_steps(t)
    if n == 0:
        return 0.0
    ch = ReplicaChannel(ts, state, alpha)
    program = []
    if l <= 2 * t:
        program += [("rho", True), ("v", False)] * l
        program += [("rho", False), ("v", False)] * (n - l)
        program += [("rho", False), ("v", True)] * l
    else:
        program += [("rho", True), ("v", False)] * n
        program += [("rho", True), ("v", True)] * (l - n)
        program += [("rho", False), ("v", True)] * n
    tr = _replica_trace(ch, program)
    return float(np.log(tr) / (1 - alpha))


def renyi_half_chain(ts, state, t, alpha) -> float:
    """H_alpha of the semi-infinite right half chain."""
    if alpha < 2 or int(alpha) != alpha:
        raise ValueError("alpha must be an integer >= 2")
    n = _half_steps(t)
    if n == 0:
        return 0.0
    ch = ReplicaChannel(ts, state, alpha)
    program = [("rho", True), ("v", False)] * n
    tr = _replica_trace(ch, program)
    return float(np.log(tr) / (1 - alpha))


def equilibration(ts, state, tol=TOL_NUM):
    """(lambda_1, info): subleading transfer eigenvalue and decay data.

    Equilibration of an L_A-cell block happens at t* = L_A/2 + O(log 1/|l1|).
    """
    st = TransferStack(ts, state)
    vals = np.linalg.eigvals(st.cell())
    vals = vals[np.argsort(-np.abs(vals))]
    radius = float(np.abs(vals[0]))
    if abs(radius - 1.0) > 1e-6:
        raise FloatingPointError(f"transfer spectral radius {radius:.6f} != 1")
    inside = [v for v in vals if abs(v) < 1 - tol]
    unit_count = int(sum(1 for v in vals if abs(v) >= 1 - tol))
    if not inside:
        raise FloatingPointError("no eigenvalue strictly inside the unit circle")
    lam1 = complex(inside[0])
    return lam1, {"rate": float(-np.log(abs(lam1))) if abs(lam1) > 0 else np.inf,
                  "unit_multiplicity": unit_count}


# -- projector MPO and trace channels ------------------------------------------------------


def projector_mpo(ts: SolvableTensorSet):
    """Per-site MPO tensors of the global projector; bond 1 for bialgebra tier.

    Axes [bond_left, bond_right, out, in].  The v-site (integer position)
    sits between a Q bond on its left cut and a P bond on its right cut; the
    rho-site between a P bond (left) and a Q bond (right).
    """
    if "bialgebra" in tier_chain(ts.algebra.tier):
        return {"v": np.eye(ts.d_v, dtype=complex)[None, None],
                "rho": np.eye(ts.d_rho, dtype=complex)[None, None]}
    pp = build_projectors(ts.pair)
    dv, dr = ts.d_v, ts.d_rho
    P = pp.P.reshape(dv, dr, dv, dr)        # [i, a, j, b]
    Q = pp.Q.reshape(dr, dv, dr, dv)        # [a, i, b, j]
    # exact splits with matrix-unit bonds on the rho sites:
    #   Q = sum_{(a,b)} E_ab (rho side) (x) QR[(a,b)],  QR[(a,b)][i,j] = Q[a,i,b,j]
    #   P = sum_{(a,b)} PL[(a,b)] (x) E_ab (rho side),  PL[(a,b)][i,j] = P[i,a,j,b]
    # v-site: in -> QR[bond_left] -> mid -> PL[bond_right] -> out
    W_v = np.einsum("oCmD,AmBi->ABCDoi", P, Q, optimize=True)
    W_v = W_v.reshape(dr * dr, dr * dr, dv, dv)
    # rho-site: the two matrix units compose to delta_{bP,aQ} |aP><bQ|
    W_r = np.zeros((dr, dr, dr, dr, dr, dr), dtype=complex)
    for aP in range(dr):
        for bP in range(dr):
            for bQ in range(dr):
                W_r[aP, bP, bP, bQ, aP, bQ] = 1.0
    W_r = W_r.reshape(dr * dr, dr * dr, dr, dr)
    return {"v": W_v, "rho": W_r}

def _leading_environment(M, tol=TOL_NUM):
    """(lambda, [(l_k, r_k)]) of a channel matrix; pairs are biorthonormal.

    Dense eigendecomposition below EIG_DENSE_CAP, else power iteration.  A
    degenerate leading modulus returns every eigenpair on that circle (the
    projector onto the full unit-modulus eigenspace).
    """
    n = M.shape[0]
    if n <= EIG_DENSE_CAP:
        vals, vr = np.linalg.eig(M)
        wl, vl = np.linalg.eig(M.T)
        order = np.argsort(-np.abs(vals))
        lam = vals[order[0]]
        keep = [k for k in range(n) if np.abs(vals[k]) >= np.abs(lam) * (1 - tol)]
        pairs = []
        for k in keep:
            r = vr[:, k]
            cand = [j for j in range(n) if abs(wl[j] - vals[k]) <= 1e-8 * max(1, abs(vals[k]))]
            l = vl[:, cand[0]]
            l = l / (l @ r)
            pairs.append((l, r))
        return lam, pairs
    # power iteration (simple leading eigenvalue assumed)
    rng = np.random.default_rng(7)
    r = rng.normal(size=n) + 1j * rng.normal(size=n)
    l = rng.normal(size=n) + 1j * rng.normal(size=n)
    lam = 1.0
    for _ in range(POWER_ITER_CAP):
        r_new = M @ r
        lam_new = np.linalg.norm(r_new)
        r_new = r_new / lam_new
        if np.linalg.norm(r_new - r) < POWER_ITER_TOL:
            r = r_new
            lam = lam_new
            break
        r = r_new
        lam = lam_new
    for _ in range(POWER_ITER_CAP):
        l_new = M.T @ l
        l_new = l_new / np.linalg.norm(l_new)
        if np.linalg.norm(l_new - l) < POWER_ITER_TOL:
            l = l_new
            break
        l = l_new
    phase = (M @ r)[np.argmax(np.abs(r))] / r[np.argmax(np.abs(r))]
    l = l / (l @ r)
    return complex(phase), [(l, r)]


class _MpoLayer:
    """One operator layer of a trace channel over a site window."""

    def __init__(self, tensors):
        self.tensors = tensors          # per site: [bl, br, out, in]

    @classmethod
    def identity(cls, dims):
        return cls([np.eye(d, dtype=complex)[None, None] for d in dims])

    @classmethod
    def site_operator(cls, dims, where, op):
        tensors = []
        for k, d in enumerate(dims):
            if k == where:
                tensors.append(np.asarray(op, dtype=complex)[None, None])
            else:
                tensors.append(np.eye(d, dtype=complex)[None, None])
        return cls(tensors)

    @classmethod
    def from_heisenberg(cls, hmpo: HeisenbergMPO, window, dagger=False):
        """Embed a Heisenberg MPO into a site window (identity outside)."""
        support = hmpo.support()
        pos_to_col = {round(2 * p): k for k, p in enumerate(support)}
        tensors = []
        for p in window:
            key = round(2 * p)
            if key not in pos_to_col:
                d = hmpo.ts.d_v if leg_of(p, 0) == "v" else hmpo.ts.d_rho
                tensors.append(np.eye(d, dtype=complex)[None, None])
                continue
            k = pos_to_col[key]
            W = hmpo.site_tensor(k)
            if k == 0:
                W = np.einsum("l,lrxy->rxy", hmpo.boundary_left(), W)[None]
            if k == hmpo.n_columns - 1:
                W = np.einsum("lrxy,r->lxy", W, hmpo.boundary_right())[:, None]
            if dagger:
                W = np.conj(np.swapaxes(W, 2, 3))
            tensors.append(W)
        return cls(tensors)

    @classmethod
    def heisenberg_rows(cls, hmpo: HeisenbergMPO, window, dagger=False):
        """The same embedded MPO as three layers: ket row, operator, bra row.

        Splitting the rows keeps every bond at d_A instead of d_A^2, which is
        what makes the four-row OTOC channel affordable.  Returns the layer
        list ordered innermost (applied first) to outermost.
        """
        ts = hmpo.ts
        support = hmpo.support()
        pos_to_col = {round(2 * p): k for k, p in enumerate(support)}
        kets, bras = [], []
        dims = []
        op_where = None
        for s_idx, p in enumerate(window):
            key = round(2 * p)
            if key not in pos_to_col:
                d = ts.d_v if leg_of(p, 0) == "v" else ts.d_rho
                dims.append(d)
                kets.append(np.eye(d, dtype=complex)[None, None])
                bras.append(np.eye(d, dtype=complex)[None, None])
                continue
            k = pos_to_col[key]
            kind = "rho" if k % 2 == 0 else "v"
            base = ts.rho_tensor if kind == "rho" else ts.v_tensor
            dims.append(base.shape[1])
            # ket row: phys in (down leg) -> internal out (up leg), bonds (y, x)
            K = np.transpose(base, (3, 2, 0, 1))          # [y, x, up, down]
            B = np.conj(np.transpose(base, (3, 2, 1, 0)))  # conj row: in = up of ket
            if k == 0:
                K = np.einsum("l,lrxy->rxy", ts.counit_vec, K)[None]
                B = np.einsum("l,lrxy->rxy", ts.counit_vec.conj(), B)[None]
            if k == hmpo.n_columns - 1:
                K = np.einsum("lrxy,r->lxy", K, ts.unit_vec)[:, None]
                B = np.einsum("lrxy,r->lxy", B, ts.unit_vec.conj())[:, None]
            kets.append(K)
            bras.append(B)
            if (hmpo.leg == "v" and k == hmpo.n_columns - 1) or \
                    (hmpo.leg == "rho" and k == 0):
                op_where = s_idx
        op_layer = cls.site_operator(dims, op_where, hmpo.op)
        ket_layer, bra_layer = cls(kets), cls(bras)
        if dagger:
            flip = lambda layer: cls([np.conj(np.swapaxes(W, 2, 3))
                                      for W in layer.tensors])
            op_dag = cls.site_operator(dims, op_where, hmpo.op.conj().T)
            return [flip(bra_layer), op_dag, flip(ket_layer)]
        return [ket_layer, op_layer, bra_layer]

    @classmethod
    def projector(cls, ts, window):
        mats = projector_mpo(ts)
        tensors = []
        for p in window:
            kind = "v" if leg_of(p, 0) == "v" else "rho"
            tensors.append(mats[kind])
        return cls(tensors)


def _sweep_channel(layers, left_vec):
    """Sweep the per-site trace channel over the window starting from left_vec."""
    n_layers = len(layers)
    n_sites = len(layers[0].tensors)
    vec = left_vec.reshape((left_vec.size,) + (1,) * (n_layers - 1))
    for s in range(n_sites):
        tens = [layer.tensors[s] for layer in layers]
        d_phys = tens[-1].shape[3]
        acc = None
        for s0 in range(d_phys):
            cur = vec
            for li in range(n_layers - 1, -1, -1):
                W = tens[li]
                if li == n_layers - 1:
                    cur = np.tensordot(cur, W[:, :, :, s0], axes=([li], [0]))
                else:
                    cur = np.tensordot(cur, W, axes=([li, cur.ndim - 1], [0, 3]))
                cur = np.moveaxis(cur, -2, li)      # new bond back in place, phys last
            part = cur[..., s0]
            acc = part if acc is None else acc + part
        vec = acc
    return vec


def _trace_channel_value(layers, left_env, right_env):
    """Contract Tr[L_n ... L_1] over the window with boundary environments.

    `layers` are ordered outermost-first (L_n first); the physical trace runs
    per site.  Environments attach to the first layer's bonds (the projector
    layer); every other layer must begin and end with bond dimension 1.
    """
    vec = _sweep_channel(layers, left_env)
    return complex(vec.reshape(-1) @ right_env)


def _window_channel_matrix(layers):
    """The window contraction as a matrix over the first layer's edge bonds."""
    b = layers[0].tensors[0].shape[0]
    rows = []
    for k in range(b):
        e = np.zeros(b)
        e[k] = 1.0
        rows.append(_sweep_channel(layers, e).reshape(-1))
    return np.stack(rows)


def _pure_cell_channel(ts):
    """Per-cell (v-site then rho-site) trace channel of the projector MPO."""
    mats = projector_mpo(ts)
    Nv = np.einsum("lrxx->lr", mats["v"])
    Nr = np.einsum("lrxx->lr", mats["rho"])
    return Nv @ Nr


def st_correlator(ts, A_op, B_op, x, t, ring_cells=None) -> complex:
    """Normalized infinite-chain trace Tr[P A_0(t) B_x(0)] / Tr[P].

    A sits at position 0 at time t, B at position x at time 0; both on the
    legs their coordinates dictate.  Zero outside the lightcone |x| > t.
    """
    if abs((x - t) - round(x - t)) > 1e-9:
        raise ValueError("need x - t integer")
    n = _half_steps(t)
    if abs(x) > t:
        return 0.0 + 0.0j
    if n == 0:
        window = [0.0, 0.5]
        AB = np.asarray(A_op) @ np.asarray(B_op)
        layers = [_MpoLayer.projector(ts, window),
                  _MpoLayer.site_operator([ts.d_v, ts.d_rho], 0, AB)]
        return _st_value(ts, window, layers)
    hm = heisenberg_mpo(ts, A_op, t, position=0.0)
    support = hm.support()
    p_min = int(np.floor(min(min(support), x)))
    p_max = int(np.ceil(max(max(support), x) - 0.5))
    window = []
    for p in range(p_min, p_max + 1):
        window += [float(p), p + 0.5]
    dims = [ts.d_v if leg_of(q, 0) == "v" else ts.d_rho for q in window]
    ket, op_layer, bra = _MpoLayer.heisenberg_rows(hm, window)
    layers = [
        _MpoLayer.projector(ts, window),
        bra, op_layer, ket,
        _MpoLayer.site_operator(dims, window.index(float(x)), B_op),
    ]
    return _st_value(ts, window, layers, ring_cells=ring_cells)


def _st_value(ts, window, layers, ring_cells=None) -> complex:
    """Normalized projector trace: infinite chain (environments) by default,
    or closed periodically over `ring_cells` unit cells for exact comparison
    with a finite-ring dense trace."""
    E = _pure_cell_channel(ts)
    pure = [_MpoLayer.projector(ts, window)]
    if ring_cells is not None:
        extra = ring_cells - len(window) // 2
        if extra < 0:
            raise ValueError("ring smaller than the operator window")
        Eout = np.linalg.matrix_power(E, extra)
        num = np.trace(Eout @ _window_channel_matrix(layers))
        den = np.trace(Eout @ _window_channel_matrix(pure))
        return complex(num / den)
    lam, pairs = _leading_environment(E)
    num = 0.0 + 0.0j
    den = 0.0 + 0.0j
    for l_env, r_env in pairs:
        num += _trace_channel_value(layers, l_env, r_env)
        den += _trace_channel_value(pure, l_env, r_env)
    return complex(num / den)


def otoc(ts, V_op, W_op, x, t, warn_nonunitary=True, ring_cells=None) -> complex:
    """F(V, W, x, t) = normalized Tr[P W_0^dag V_x(t)^dag W_0 V_x(t)]."""
    import warnings

    V_op = np.asarray(V_op, dtype=complex)
    W_op = np.asarray(W_op, dtype=complex)
    if warn_nonunitary:
        for name, op in (("V", V_op), ("W", W_op)):
            if np.abs(op @ op.conj().T - np.eye(op.shape[0])).max() > 1e-9:
                warnings.warn(f"{name} is not unitary; OTOC computed anyway")
    n = _half_steps(t)
    if n == 0:
        p_min = int(np.floor(min(0.0, x)))
        p_max = int(np.ceil(max(0.0, x)))
        window = []
        for p in range(p_min, p_max + 1):
            window += [float(p), p + 0.5]
        dims = [ts.d_v if leg_of(q, 0) == "v" else ts.d_rho for q in window]
        w_at = window.index(0.0)
        v_at = window.index(float(x))
        layers = [
            _MpoLayer.projector(ts, window),
            _MpoLayer.site_operator(dims, w_at, W_op.conj().T),
            _MpoLayer.site_operator(dims, v_at, V_op.conj().T),
            _MpoLayer.site_operator(dims, w_at, W_op),
            _MpoLayer.site_operator(dims, v_at, V_op),
        ]
        return _st_value(ts, window, layers)
    hm = heisenberg_mpo(ts, V_op, t, position=x)
    support = hm.support()
    p_min = int(np.floor(min(min(support), 0.0)))
    p_max = int(np.ceil(max(max(support), 0.0) - 0.5))
    window = []
    p = p_min
    while p <= p_max:
        window.append(float(p))
        window.append(p + 0.5)
        p += 1
    dims = [ts.d_v if leg_of(pp, 0) == "v" else ts.d_rho for pp in window]
    w_where = window.index(0.0)
    v_rows = _MpoLayer.heisenberg_rows(hm, window)
    vdag_rows = _MpoLayer.heisenberg_rows(hm, window, dagger=True)
    layers = [
        _MpoLayer.projector(ts, window),
        _MpoLayer.site_operator(dims, w_where, W_op.conj().T),
        *reversed(vdag_rows),
        _MpoLayer.site_operator(dims, w_where, W_op),
        *reversed(v_rows),
    ]
    return _st_value(ts, window, layers, ring_cells=ring_cells)


# -- PBC evolution and revivals -------------------------------------------------------


@dataclass
class PbcEvolution:
    """The ring evolution operator at t_k = (kL + 1)/2 as composed shape MPOs.

    `operator` acts on the 2L-site ring in site order (0, 1, ..., 2L-1) with
    v-sites at even indices; `translation_cells` records the outstanding
    translation power (T_{L/2})^k, included in `operator`.
    """

    L: int
    k: int
    operator: np.ndarray
    translation_cells: int


def _ring_translation(d, n_sites, shift_sites):
    dim = d ** n_sites
    perm = np.zeros(dim, dtype=np.int64)
    # site s content moves to site s + shift
    strides = d ** np.arange(n_sites)[::-1]
    for code in range(dim):
        digits = [(code // strides[s]) % d for s in range(n_sites)]
        new_digits = [digits[(s - shift_sites) % n_sites] for s in range(n_sites)]
        perm[code] = int(np.dot(new_digits, strides))
    T = np.zeros((dim, dim))
    T[perm, np.arange(dim)] = 1.0
    return T


def _leg_to_ring_permutation(d, n_sites, site_of_leg):
    """Permutation matrix: (P psi_ring) carries ring amplitudes in leg order."""
    dim = d ** n_sites
    strides = d ** np.arange(n_sites)[::-1]
    P = np.zeros((dim, dim))
    for code in range(dim):
        digits = [(code // strides[k]) % d for k in range(n_sites)]
        ring = [0] * n_sites
        for k in range(n_sites):
            ring[site_of_leg[k]] = digits[k]
        P[code, int(np.dot(ring, strides))] = 1.0
    return P


def _axis_permutation(d, n_sites, order):
    dim = d ** n_sites
    src = np.arange(dim).reshape((d,) * n_sites)
    moved = np.transpose(src, order).reshape(-1)
    P = np.zeros((dim, dim))
    P[np.arange(dim), moved] = 1.0
    return P


def pbc_evolution_mpo(ts, L, k=1) -> PbcEvolution:
    """U(t_k) on the 2L-site ring: translation o inverted-triangle o diamond^{k-1}
    o triangle, with legs aligned so the result equals the brickwork product of
    kL + 1 layers (projector-dressed in the weak case).
    """
    if ts.d_rho != ts.d_v:
        raise ValueError("the ring operator needs d_rho = d_v")
    d = ts.d_rho
    n = 2 * L
    dim = d ** n
    tri = mpo_triangle(ts, L).reshape(dim, dim)
    inv = mpo_inverted_triangle(ts, L).reshape(dim, dim)
    if k >= 2:
        mid = mpo_diamond_power(ts, L, k - 1)
        order = []
        for kk in range(L):
            order += [kk, L + kk]            # (a-block, i-block) -> (a1, i1, ...)
        Pi = _axis_permutation(d, n, order)
        mid = Pi @ mid @ Pi.T
    else:
        mid = np.eye(dim, dtype=complex)
    # the inverted triangle's lower legs are ordered (j1, b1, ...) while the
    # stack below produces (a1, i1, ...): pairing j_k <-> i_k, b_k <-> a_k is a
    # swap within each pair
    order = []
    for kk in range(L):
        order += [2 * kk + 1, 2 * kk]
    Psw = _axis_permutation(d, n, order)
    M = inv @ Psw @ mid @ tri
    # ring embedding (calibrated against the dense brickwork): input legs
    # (b1, j1, ..., bL, jL) sit at sites (1, 2, ..., 2L-1, 0); output legs
    # (i_k, a_k) at sites (2k-1, 2k); the translation T_{L/2}^k adds kL sites.
    in_sites = []
    out_sites = []
    for kk in range(1, L + 1):
        in_sites += [(2 * kk - 1) % n, (2 * kk) % n]
        out_sites += [(2 * kk - 1) % n, (2 * kk) % n]
    P_in = _leg_to_ring_permutation(d, n, in_sites)
    P_out = _leg_to_ring_permutation(d, n, out_sites)
    bare = P_out.T @ M @ P_in
    T = _ring_translation(d, n, (k * L) % n)
    return PbcEvolution(L=L, k=k, operator=T @ bare, translation_cells=k % 2)


def revival_time(ts, L) -> int:
    """The eta * L upper bound on the ring revival time."""
    eta, _nu = exponent(ts.algebra)
    return eta * L
