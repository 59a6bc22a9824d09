"""Fast thermalization of a harmonic oscillator.

All controls reduce to scalars on top of static Fock-basis operators:

- u = e^{-beta hbar omega} parametrizes the instantaneous thermal state,
  occupations lambda_n = u^n (1-u)/(1-u^N) (geometric, renormalized on the
  truncated ladder so the prescribed trajectory is exactly trace preserving);
- transport_rate = u_dot/(1-u^2) moves population along the ladder;
- squeeze_rate = transport_rate - omega_dot/(2 omega) is the log-derivative
  -N_dot/N of the Gaussian normalization and must vanish at the endpoints
  for the frame transform to drop out;
- cd_frequency_sq = omega^2 - squeeze_rate^2 - d(squeeze_rate)/dt is the
  effective trap curvature of the driven frame (negative values = transient
  trap inversion);
- dephasing_strength = (m omega/hbar) u_dot/(1-u)^2 multiplies the position
  double commutator; it changes sign with u_dot.

The Fock representation keeps x and p in the number basis of one fixed
reference frequency. The reference defaults to the trap frequency of the
hotter endpoint (larger u): that endpoint's thermal tail decides how much of
the ladder the run actually uses, and anchoring the basis there keeps the
truncation error at the variance level rather than dominating it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..config import DEFAULT_TOL, HBAR, TimeGrid, Tolerances
from ..controls import ControlSet
from ..errors import DegenerateU, StaOpenError, TruncationTooSmall
from ..propagator import DephasingControls
from ..schedules import Schedule
from ..trajectory import SpectralTrajectory


@dataclass(frozen=True)
class OscillatorSpec:
    mass: float
    omega: Schedule
    beta: Schedule
    n_levels: int
    t_f: float

    def __post_init__(self):
        if self.mass <= 0:
            raise StaOpenError("mass must be positive")
        if self.n_levels < 2:
            raise TruncationTooSmall("need at least 2 ladder levels")


@dataclass(frozen=True)
class OscillatorControls:
    """Scalar control snapshot at one time."""

    t: float
    omega: float
    beta: float
    u: float
    u_dot: float
    transport_rate: float
    squeeze_rate: float
    cd_frequency_sq: float
    dephasing_strength: float


def _u_of(spec: OscillatorSpec, t: float, tol: Tolerances) -> tuple[float, float]:
    om, om_dot = spec.omega(t), spec.omega.derivative(t)
    be, be_dot = spec.beta(t), spec.beta.derivative(t)
    if om <= 0.0 or be <= 0.0:
        raise DegenerateU(f"omega={om}, beta={be} at t={t}; need both positive")
    u = float(np.exp(-HBAR * be * om))
    if not tol.u_eps < u < 1.0 - tol.u_eps:
        raise DegenerateU(f"u={u:.3e} at t={t} outside ({tol.u_eps}, 1-{tol.u_eps})")
    u_dot = -HBAR * (be_dot * om + be * om_dot) * u
    return u, u_dot


def _squeeze_rate(spec: OscillatorSpec, t: float, tol: Tolerances) -> float:
    u, u_dot = _u_of(spec, t, tol)
    om, om_dot = spec.omega(t), spec.omega.derivative(t)
    return u_dot / (1.0 - u * u) - om_dot / (2.0 * om)


def osc_controls(spec: OscillatorSpec, t: float,
                 tol: Tolerances = DEFAULT_TOL,
                 fd_step: float | None = None) -> OscillatorControls:
    """All scalar controls at time t.

    The squeeze-rate derivative entering cd_frequency_sq comes from a central
    difference on the schedules (which clamp outside [0, t_f], so endpoint
    evaluations stay well defined).
    """
    h = fd_step if fd_step is not None else 1e-6 * max(abs(spec.t_f), 1.0)
    om, om_dot = spec.omega(t), spec.omega.derivative(t)
    be = spec.beta(t)
    u, u_dot = _u_of(spec, t, tol)
    transport = u_dot / (1.0 - u * u)
    squeeze = transport - om_dot / (2.0 * om)
    squeeze_dot = (_squeeze_rate(spec, t + h, tol)
                   - _squeeze_rate(spec, t - h, tol)) / (2.0 * h)
    cd_freq_sq = om * om - squeeze * squeeze - squeeze_dot
    dephasing = (spec.mass * om / HBAR) * u_dot / (1.0 - u) ** 2
    return OscillatorControls(
        t=float(t), omega=float(om), beta=float(be), u=u, u_dot=u_dot,
        transport_rate=float(transport), squeeze_rate=float(squeeze),
        cd_frequency_sq=float(cd_freq_sq), dephasing_strength=float(dephasing))


# -- Fock representation -----------------------------------------------------


def fock_operators(n_levels: int, mass: float = 1.0,
                   omega_ref: float = 1.0) -> tuple[np.ndarray, np.ndarray]:
    """(x, p) in the number basis of the reference oscillator."""
    a = np.diag(np.sqrt(np.arange(1, n_levels)), 1).astype(complex)
    ad = a.conj().T
    x = np.sqrt(HBAR / (2.0 * mass * omega_ref)) * (a + ad)
    p = 1j * np.sqrt(HBAR * mass * omega_ref / 2.0) * (ad - a)
    return x, p


def thermal_fock_state(x: np.ndarray, p: np.ndarray, mass: float,
                       omega: float, beta: float) -> np.ndarray:
    """Gibbs state of the truncated trap Hamiltonian."""
    h = p @ p / (2.0 * mass) + 0.5 * mass * omega**2 * (x @ x)
    w, v = np.linalg.eigh(0.5 * (h + h.conj().T))
    ex = np.exp(-beta * (w - w.min()))
    ex /= ex.sum()
    return (v * ex) @ v.conj().T


def reference_frequency(spec: OscillatorSpec,
                        tol: Tolerances = DEFAULT_TOL) -> float:
    """Trap frequency of the hotter (larger-u) endpoint."""
    u0, _ = _u_of(spec, 0.0, tol)
    uf, _ = _u_of(spec, spec.t_f, tol)
    return float(spec.omega(0.0) if u0 >= uf else spec.omega(spec.t_f))


def truncation_tails(spec: OscillatorSpec, omega_ref: float,
                     margin: int = 60) -> tuple[float, float]:
    """Endpoint thermal population above level N-2 of the reference basis.

    Evaluated in an enlarged ladder (N + margin levels) so the reported tail
    is not itself truncated away.
    """
    n_big = spec.n_levels + margin
    x, p = fock_operators(n_big, spec.mass, omega_ref)
    tails = []
    for t in (0.0, spec.t_f):
        rho = thermal_fock_state(x, p, spec.mass, spec.omega(t), spec.beta(t))
        pops = np.real(np.diag(rho))
        tails.append(float(pops[spec.n_levels - 2:].sum()))
    return tails[0], tails[1]


def validate_truncation(spec: OscillatorSpec, omega_ref: float,
                        tol: Tolerances = DEFAULT_TOL) -> tuple[float, float]:
    tails = truncation_tails(spec, omega_ref)
    worst = max(tails)
    if worst > tol.trunc_tail:
        raise TruncationTooSmall(
            f"endpoint tail mass {worst:.3e} above level {spec.n_levels - 2} "
            f"exceeds {tol.trunc_tail:.1e}; raise n_levels")
    return tails


class OscillatorDephasingModel:
    """Provider for the dephasing form of the driven master equation.

    controls_at(t) returns the drift p^2/2m + (m/2) cd_frequency_sq x^2 and
    the scalar dephasing strength; the initial state is the truncated thermal
    state of the starting trap.
    """

    def __init__(self, spec: OscillatorSpec, omega_ref: float | None = None,
                 tol: Tolerances = DEFAULT_TOL, validate: bool = True):
        self.spec = spec
        self.omega_ref = (reference_frequency(spec, tol)
                          if omega_ref is None else float(omega_ref))
        self.tol = tol
        if validate:
            validate_truncation(spec, self.omega_ref, tol)
        self.x, self.p = fock_operators(spec.n_levels, spec.mass, self.omega_ref)
        self._kin = self.p @ self.p / (2.0 * spec.mass)
        self._x2 = self.x @ self.x

    def controls_at(self, t: float) -> DephasingControls:
        c = osc_controls(self.spec, t, self.tol)
        drift = self._kin + (0.5 * self.spec.mass * c.cd_frequency_sq) * self._x2
        return DephasingControls(t=float(t), h=drift, x=self.x,
                                 strength=c.dephasing_strength)

    def state(self, t: float) -> np.ndarray:
        return thermal_fock_state(self.x, self.p, self.spec.mass,
                                  self.spec.omega(t), self.spec.beta(t))


def fock_position_variance(states: np.ndarray, x: np.ndarray) -> np.ndarray:
    """<x^2> - <x>^2 for each state in a (k, d, d) stack."""
    x2 = x @ x
    mean = np.real(np.einsum("kij,ji->k", states, x))
    mean_sq = np.real(np.einsum("kij,ji->k", states, x2))
    return mean_sq - mean**2


# -- Gaussian representation -------------------------------------------------


@dataclass(frozen=True)
class GaussianState:
    """Thermal Gaussian kernel parameters at one time.

    a and c are the diagonal and cross curvatures (1/length^2), norm the
    normalization (1/length), k = sqrt(m omega/hbar) the trap length scale.
    """

    a: float
    c: float
    norm: float
    k: float

    @property
    def position_variance(self) -> float:
        return 1.0 / (4.0 * (self.a + self.c))


def gaussian_thermal(mass: float, omega: float, beta: float,
                     tol: Tolerances = DEFAULT_TOL) -> GaussianState:
    """Closed-form thermal Gaussian for a trap (m, omega) at beta."""
    u = float(np.exp(-HBAR * beta * omega))
    if not tol.u_eps < u < 1.0 - tol.u_eps:
        raise DegenerateU(f"u={u:.3e} outside the open unit interval")
    k_sq = mass * omega / HBAR
    a = k_sq * (1.0 + u * u) / (2.0 * (1.0 - u * u))
    c = -k_sq * u / (1.0 - u * u)
    norm = np.sqrt(2.0 * (a + c) / np.pi)
    return GaussianState(a=float(a), c=float(c), norm=float(norm),
                         k=float(np.sqrt(k_sq)))


def osc_gaussian_evolve(spec: OscillatorSpec, grid: TimeGrid,
                        tol: Tolerances = DEFAULT_TOL, check: bool = True,
                        check_tol: float = 1e-6) -> dict:
    """Closed-form Gaussian trajectory on the grid.

    With check=True the two kernel identities are enforced at every node
    (finite differences): the squeeze rate equals -norm_dot/norm, and
    a_dot + 2*squeeze*a = -(c_dot + 2*squeeze*c) = dephasing_strength.
    """
    times = grid.nodes()
    h = 1e-6 * max(abs(spec.t_f), 1.0)

    def kernel(t: float) -> GaussianState:
        return gaussian_thermal(spec.mass, spec.omega(t), spec.beta(t), tol)

    a = np.empty(times.size)
    c = np.empty(times.size)
    norm = np.empty(times.size)
    var = np.empty(times.size)
    worst = np.zeros(3)
    for i, t in enumerate(times):
        g = kernel(t)
        a[i], c[i], norm[i], var[i] = g.a, g.c, g.norm, g.position_variance
        ctrl = osc_controls(spec, t, tol)
        gp, gm = kernel(t + h), kernel(t - h)
        norm_rate = (gp.norm - gm.norm) / (2.0 * h * g.norm)
        a_dot = (gp.a - gm.a) / (2.0 * h)
        c_dot = (gp.c - gm.c) / (2.0 * h)
        res = (abs(-norm_rate - ctrl.squeeze_rate),
               abs(a_dot + 2.0 * ctrl.squeeze_rate * g.a
                   - ctrl.dephasing_strength),
               abs(-c_dot - 2.0 * ctrl.squeeze_rate * g.c
                   - ctrl.dephasing_strength))
        np.maximum(worst, res, out=worst)
    if check and worst.max() > check_tol:
        raise StaOpenError(
            f"Gaussian kernel identities violated: residuals {worst} "
            f"exceed {check_tol:.1e}")
    return {"times": times, "a": a, "c": c, "norm": norm,
            "position_variance": var, "identity_residuals": worst}


# -- spectral (ladder) representation ----------------------------------------


def _log_occupation_rates(spec: OscillatorSpec, t: float,
                          tol: Tolerances) -> np.ndarray:
    """d/dt log lambda_n for the renormalized geometric occupations.

    Stays finite for every level even where lambda_n underflows, which is
    why the ladder controls never form lambda_dot/lambda from the values.
    """
    u, u_dot = _u_of(spec, t, tol)
    n_arr = np.arange(spec.n_levels, dtype=float)
    un = u ** spec.n_levels
    return (n_arr * u_dot / u - u_dot / (1.0 - u)
            + spec.n_levels * (u ** (spec.n_levels - 1)) * u_dot / (1.0 - un))


def squeeze_generator(n_levels: int) -> np.ndarray:
    """K = (adag^2 - a^2)/2 on the truncated ladder, real antisymmetric."""
    k = np.zeros((n_levels, n_levels))
    n = np.arange(n_levels - 2, dtype=float)
    amp = 0.5 * np.sqrt((n + 1.0) * (n + 2.0))
    rows = np.arange(2, n_levels)
    cols = np.arange(n_levels - 2)
    k[rows, cols] = amp
    k[cols, rows] = -amp
    return k


class SqueezeBasis:
    """Unitaries exp(r K) in the reference Fock representation.

    The trap eigenbasis at frequency omega is the squeeze of the reference
    ladder with r = log(omega_ref/omega)/2; because exp(r K) commutes with
    K, the frame velocity is exactly r_dot K and the steering Hamiltonian
    is i r_dot K with no numerics beyond one diagonalization of K.
    """

    def __init__(self, n_levels: int):
        self.n_levels = n_levels
        self.k = squeeze_generator(n_levels)
        # 1j K is Hermitian, so exp(r K) = V exp(-1j r mu) V^dag
        self._mu, self._v = np.linalg.eigh(1j * self.k)

    def unitary(self, r: float) -> np.ndarray:
        phases = np.exp(-1j * r * self._mu)
        return (self._v * phases) @ self._v.conj().T


def osc_spectral_trajectory(spec: OscillatorSpec, grid: TimeGrid,
                            omega_ref: float | None = None,
                            tol: Tolerances = DEFAULT_TOL) -> SpectralTrajectory:
    """Prescribed thermal trajectory on the truncated ladder.

    Occupations are the closed-form geometric weights; the eigenbasis is the
    analytic squeeze of the reference ladder, so it is smooth in t and free
    of the spurious top-of-ladder crossings a truncated diagonalization
    produces. All levels are declared occupied so rank-complete controls
    exist even where high-ladder occupations underflow.
    """
    om_ref = reference_frequency(spec, tol) if omega_ref is None else omega_ref
    sq = SqueezeBasis(spec.n_levels)

    def r_of(t: float) -> float:
        return 0.5 * np.log(om_ref / spec.omega(t))

    def lambda_fn(t: float) -> np.ndarray:
        u, _ = _u_of(spec, t, tol)
        lam = (1.0 - u) / (1.0 - u ** spec.n_levels) \
            * u ** np.arange(spec.n_levels, dtype=float)
        return lam

    def lambda_dot_fn(t: float) -> np.ndarray:
        return lambda_fn(t) * _log_occupation_rates(spec, t, tol)

    def basis_fn(t: float) -> np.ndarray:
        return sq.unitary(r_of(t))

    def basis_dot_fn(t: float) -> np.ndarray:
        r_dot = -0.5 * spec.omega.derivative(t) / spec.omega(t)
        return r_dot * (sq.k @ sq.unitary(r_of(t)))

    traj = SpectralTrajectory(
        spec.n_levels, grid.tf, lambda_fn, basis_fn,
        lambda_dot_fn=lambda_dot_fn, basis_dot_fn=basis_dot_fn, t0=grid.t0,
        occupied=np.ones(spec.n_levels, dtype=bool), tol=tol)
    traj.squeeze = sq
    traj.omega_ref = om_ref
    return traj


class OscillatorSpectralControls:
    """Gain/loss controls of the prescribed ladder trajectory.

    gamma is assembled from the closed-form log-occupation rates (never from
    a lambda_dot/lambda quotient), so it stays finite across the whole
    stroke; the steering part is the exact squeeze drive i r_dot K. Jump
    operators are not materialized (r^2 dense matrices are pure ballast at
    this dimension).
    """

    def __init__(self, spec: OscillatorSpec, grid: TimeGrid,
                 omega_ref: float | None = None,
                 tol: Tolerances = DEFAULT_TOL):
        self.spec = spec
        self.tol = tol
        self.traj = osc_spectral_trajectory(spec, grid, omega_ref, tol)
        self._sq = self.traj.squeeze
        self._levels = np.arange(spec.n_levels, dtype=float) + 0.5
        self._cache: dict[float, ControlSet] = {}

    def controls_at(self, t: float) -> ControlSet:
        key = float(t)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        om = self.spec.omega(key)
        r = 0.5 * np.log(self.traj.omega_ref / om)
        r_dot = -0.5 * self.spec.omega.derivative(key) / om
        basis = self._sq.unitary(r)
        h1 = 1j * r_dot * self._sq.k
        energies = HBAR * om * self._levels
        h_cd = h1 + (basis * energies) @ basis.conj().T
        log_rates = _log_occupation_rates(self.spec, key, self.tol)
        gamma = (basis * (-0.5 * log_rates)) @ basis.conj().T
        lam = self.traj.lambdas(key)
        cset = ControlSet(t=key, h_cd=h_cd, gamma=gamma, lindblads=[],
                          rank=self.spec.n_levels, basis=basis, lambdas=lam,
                          lambdas_dot=lam * log_rates, h1=h1)
        self._cache[key] = cset
        return cset

    def state(self, t: float) -> np.ndarray:
        return self.traj.state(t)
