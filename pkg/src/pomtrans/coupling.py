"""Microscopic coupling constants from discretized mode fields.

Electromagnetic and mechanical displacement mode functions live on uniform
rectilinear grids; overlap integrals use the trapezoid rule (second-order
accurate on smooth fields, verified by refinement in the tests) and strain is
the displacement gradient, valid in the absence of rigid-body rotation.

Unit conventions follow the materials literature this feeds on: the
piezoelectric tensor ``h`` is stored in its stress-voltage Voigt form, the
photoelastic tensor ``p`` is the 6x6 Voigt matrix (NOT assumed symmetric),
``eta`` is the inverse relative permittivity and densities are SI kg/m^3
(tabulated g/cm^3 values are multiplied by 1000 on ingestion).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .constants import EPSILON_0, HBAR
from .errors import GridError, MaterialDataError, ParameterError

# --- Voigt notation ---------------------------------------------------------

_VOIGT_OF_PAIR = {
    (1, 1): 1, (2, 2): 2, (3, 3): 3,
    (2, 3): 4, (3, 2): 4,
    (1, 3): 5, (3, 1): 5,
    (1, 2): 6, (2, 1): 6,
}
_PAIR_OF_VOIGT = {1: (1, 1), 2: (2, 2), 3: (3, 3), 4: (2, 3), 5: (1, 3), 6: (1, 2)}


def voigt_index(i: int, j: int) -> int:
    """Map a symmetric tensor index pair (1-based) to its Voigt index 1..6."""
    try:
        return _VOIGT_OF_PAIR[(i, j)]
    except KeyError:
        raise ParameterError(f"tensor indices must be in 1..3, got ({i}, {j})") from None


def voigt_pair(index: int) -> tuple[int, int]:
    """Canonical (i, j) pair of a Voigt index; inverse of :func:`voigt_index`."""
    try:
        return _PAIR_OF_VOIGT[index]
    except KeyError:
        raise ParameterError(f"Voigt index must be in 1..6, got {index}") from None


def rank3_from_voigt(m: np.ndarray) -> np.ndarray:
    """Expand a 3x6 Voigt matrix (e.g. piezoelectric h) to the full 3x3x3 tensor."""
    m = np.asarray(m, dtype=float)
    if m.shape != (3, 6):
        raise ParameterError(f"expected a 3x6 Voigt matrix, got shape {m.shape}")
    out = np.zeros((3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                out[i, j, k] = m[i, voigt_index(j + 1, k + 1) - 1]
    return out


def rank4_from_voigt(m: np.ndarray) -> np.ndarray:
    """Expand a 6x6 Voigt matrix (e.g. photoelastic p) to the full rank-4 tensor."""
    m = np.asarray(m, dtype=float)
    if m.shape != (6, 6):
        raise ParameterError(f"expected a 6x6 Voigt matrix, got shape {m.shape}")
    out = np.zeros((3, 3, 3, 3))
    for i in range(3):
        for j in range(3):
            for k in range(3):
                for l in range(3):
                    out[i, j, k, l] = m[voigt_index(i + 1, j + 1) - 1,
                                        voigt_index(k + 1, l + 1) - 1]
    return out


# --- grid and fields ---------------------------------------------------------


@dataclass(frozen=True)
class Grid3D:
    """Uniform rectilinear grid: origin, per-axis spacing and point counts."""

    origin: tuple[float, float, float]
    spacing: tuple[float, float, float]
    counts: tuple[int, int, int]

    def __post_init__(self):
        if len(self.origin) != 3 or len(self.spacing) != 3 or len(self.counts) != 3:
            raise ParameterError("origin, spacing and counts must have 3 entries each")
        if any(s <= 0 for s in self.spacing):
            raise ParameterError(f"grid spacing must be positive, got {self.spacing}")
        if any(int(c) < 1 or int(c) != c for c in self.counts):
            raise ParameterError(f"grid counts must be positive integers, got {self.counts}")
        object.__setattr__(self, "counts", tuple(int(c) for c in self.counts))

    def axis(self, k: int) -> np.ndarray:
        return self.origin[k] + self.spacing[k] * np.arange(self.counts[k])

    def meshgrid(self):
        return np.meshgrid(self.axis(0), self.axis(1), self.axis(2), indexing="ij")

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.counts

    @property
    def box_volume(self) -> float:
        return math.prod(
            self.spacing[k] * (self.counts[k] - 1) for k in range(3) if self.counts[k] > 1
        )


EM = "em"
MECH = "mech"


@dataclass(frozen=True)
class ModeField:
    """Complex vector field on a grid: an EM mode or a mechanical displacement mode."""

    grid: Grid3D
    components: np.ndarray  # shape (3, nx, ny, nz)
    kind: str
    frequency: float  # rad/s

    def __post_init__(self):
        comps = np.asarray(self.components, dtype=complex)
        if comps.shape != (3, *self.grid.shape):
            raise ParameterError(
                f"components shape {comps.shape} does not match grid {self.grid.shape}"
            )
        if not np.all(np.isfinite(comps)):
            raise ParameterError("mode field contains non-finite values")
        if self.kind not in (EM, MECH):
            raise ParameterError(f"kind must be '{EM}' or '{MECH}'")
        if self.frequency < 0:
            raise ParameterError("mode frequency must be >= 0")
        object.__setattr__(self, "components", comps)

    def scaled(self, factor: complex) -> "ModeField":
        return ModeField(self.grid, self.components * factor, self.kind, self.frequency)


def trapezoid_3d(values: np.ndarray, grid: Grid3D):
    """Volume integral of a scalar sample array by the trapezoid rule."""
    out = np.asarray(values)
    for k in (2, 1, 0):
        if grid.counts[k] > 1:
            out = np.trapezoid(out, dx=grid.spacing[k], axis=k)
        else:
            out = np.squeeze(out, axis=k)
    return out


def strain_field(w: ModeField) -> np.ndarray:
    """All nine displacement gradients d w_j / d r_k, shape (3, 3, nx, ny, nz).

    Central differences in the interior and one-sided second-order stencils at
    the boundaries.  With rigid-body rotation excluded this gradient IS the
    strain.  Axes with fewer than 3 points cannot be differentiated.
    """
    if w.kind != MECH:
        raise ParameterError("strain is defined for mechanical displacement fields")
    for k in range(3):
        if w.grid.counts[k] < 3:
            raise GridError(
                f"axis {k} has {w.grid.counts[k]} points; need >= 3 to differentiate"
            )
    out = np.empty((3, 3, *w.grid.shape), dtype=complex)
    for j in range(3):
        for k in range(3):
            out[j, k] = np.gradient(
                w.components[j], w.grid.spacing[k], axis=k, edge_order=2
            )
    return out


def _intensity(f: ModeField) -> np.ndarray:
    return np.sum(np.abs(f.components) ** 2, axis=0)


def mech_mode_volume(w: ModeField) -> float:
    """Effective mechanical mode volume.

    Inverse of the integrated square of the normalized intensity density
    sum_i |w_i|^2; independent of any rescaling of the field.
    """
    if w.kind != MECH:
        raise ParameterError("expected a mechanical displacement field")
    intensity = _intensity(w)
    norm = float(trapezoid_3d(intensity, w.grid))
    if norm == 0:
        raise ParameterError("mode field is identically zero")
    density = intensity / norm
    return 1.0 / float(trapezoid_3d(density**2, w.grid))


def em_mode_volume(e: ModeField, eta) -> float:
    """Electromagnetic mode volume with inverse-permittivity weighting.

    (integral of eta_ij E_j E_i*)^2 / integral of (eta_ij E_j E_i*)^2;
    ``eta`` may be a scalar or a 3x3 matrix (spatially uniform).
    """
    if e.kind != EM:
        raise ParameterError("expected an electromagnetic field")
    eta_m = np.asarray(eta, dtype=float)
    if eta_m.ndim == 0:
        density = float(eta_m) * _intensity(e)
    elif eta_m.shape == (3, 3):
        density = np.real(np.einsum(
            "ij,j...,i...->...", eta_m, e.components, np.conj(e.components)
        ))
    else:
        raise ParameterError("eta must be a scalar or a 3x3 matrix")
    total = float(trapezoid_3d(density, e.grid))
    if total == 0:
        raise ParameterError("mode field is identically zero")
    return total**2 / float(trapezoid_3d(density**2, e.grid))


def normalize_mech(w: ModeField) -> ModeField:
    """Rescale so the integrated intensity equals the effective mode volume."""
    v_eff = mech_mode_volume(w)
    norm = float(trapezoid_3d(_intensity(w), w.grid))
    return w.scaled(math.sqrt(v_eff / norm))


def normalize_em(e: ModeField, eta_eff: float) -> ModeField:
    """Rescale so integral of eta_eff |E|^2 equals eta_eff times the mode volume."""
    v_eff = em_mode_volume(e, eta_eff)
    norm = float(trapezoid_3d(_intensity(e), e.grid))
    return e.scaled(math.sqrt(v_eff / norm))


def effective_mass(w_m: ModeField, w_n: ModeField, rho) -> complex:
    """Density-weighted mode inner product: integral of rho sum_i w_m_i* w_n_i.

    For identical modes this is the (real, positive) effective mass; for
    distinct modes the return value is the orthogonality residual.
    ``rho`` may be a scalar (kg/m^3) or a sample array on the grid.
    """
    if w_m.grid != w_n.grid:
        raise GridError("mode fields live on different grids")
    overlap = np.sum(np.conj(w_m.components) * w_n.components, axis=0)
    value = complex(trapezoid_3d(np.asarray(rho) * overlap, w_m.grid))
    return value


# --- material tensor set -----------------------------------------------------


@dataclass(frozen=True)
class MaterialTensorSet:
    """Bulk constitutive tensors of one material (SI units).

    ``h``: piezoelectric stress-voltage tensor, 3x6 Voigt; entries may be NaN
    to mark unknown elements.  ``e``: optional stress-charge form, 3x6.
    ``p``: photoelastic 6x6 Voigt matrix, not required to be symmetric.
    ``c``: elasticity 6x6 Voigt, symmetric.  ``eta``: inverse relative
    permittivity, 3x3 symmetric positive definite.  ``rho``: kg/m^3.
    """

    rho: float
    eps_rf: float
    eps_ir: float
    h: np.ndarray | None = None
    e: np.ndarray | None = None
    p: np.ndarray | None = None
    c: np.ndarray | None = None
    eta: np.ndarray | None = None

    def __post_init__(self):
        if self.rho <= 0:
            raise MaterialDataError(f"density must be positive, got {self.rho}")
        if self.eps_rf <= 0 or self.eps_ir <= 0:
            raise MaterialDataError("permittivities must be positive")
        for name in ("h", "e", "p", "c", "eta"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, np.asarray(value, dtype=float))
        if self.h is not None and self.h.shape != (3, 6):
            raise MaterialDataError("h must be a 3x6 Voigt matrix")
        if self.e is not None and self.e.shape != (3, 6):
            raise MaterialDataError("e must be a 3x6 Voigt matrix")
        if self.p is not None and self.p.shape != (6, 6):
            raise MaterialDataError("p must be a 6x6 Voigt matrix")
        if self.c is not None:
            if self.c.shape != (6, 6):
                raise MaterialDataError("c must be a 6x6 Voigt matrix")
            if not np.allclose(self.c, self.c.T, rtol=1e-9, atol=0):
                raise MaterialDataError("elasticity matrix must be symmetric")
        if self.eta is not None:
            if self.eta.shape != (3, 3):
                raise MaterialDataError("eta must be 3x3")
            if not np.allclose(self.eta, self.eta.T, rtol=1e-9, atol=0):
                raise MaterialDataError("eta must be symmetric")
            if np.any(np.linalg.eigvalsh(self.eta) <= 0):
                raise MaterialDataError("eta must be positive definite")
        if self.h is not None and self.e is not None:
            eta_m = self.eta if self.eta is not None else np.eye(3) / self.eps_rf
            h_pred = eta_m @ self.e
            mask = np.isfinite(self.h) & np.isfinite(self.e).all(axis=0, keepdims=True)
            scale = np.max(np.abs(h_pred)) or 1.0
            if np.any(np.abs(self.h - h_pred)[mask] > 1e-9 * scale):
                raise MaterialDataError(
                    "h and e tensors are inconsistent: h_ijk must equal eta_im e_mjk"
                )

    @property
    def eta_eff(self) -> float:
        """Scalar effective inverse relative permittivity at microwave frequencies."""
        return 1.0 / self.eps_rf

    def h_element(self, i: int, j: int, k: int) -> float:
        """h_ijk (1-based tensor indices); raises when marked unknown."""
        if self.h is None:
            raise MaterialDataError("piezoelectric tensor h is not set")
        value = float(self.h[i - 1, voigt_index(j, k) - 1])
        if math.isnan(value):
            raise MaterialDataError(f"piezoelectric element h_{i}{j}{k} is unknown")
        return value


# --- coupling constants -------------------------------------------------------


def _require_matching(e: ModeField, w: ModeField):
    if e.grid != w.grid:
        raise GridError("EM and mechanical fields live on different grids")
    if e.kind != EM or w.kind != MECH:
        raise ParameterError("expected (EM field, mechanical field)")


def overlap_integral(e: ModeField, gradients: np.ndarray, j: int, k: int,
                     component: int) -> complex:
    """integral of E_i dw_j/dr_k over the grid (all indices 1-based)."""
    integrand = e.components[component - 1] * gradients[j - 1, k - 1]
    return complex(trapezoid_3d(integrand, e.grid))


def piezo_coupling(e: ModeField, w: ModeField, mat: MaterialTensorSet,
                   component: tuple[int, int, int],
                   v_eff_em: float | None = None,
                   v_eff_mech: float | None = None) -> complex:
    """Single-component piezoelectric coupling rate g_ijk between two modes.

    i sqrt(omega_em/omega_mech) / (4 V_mn) * sqrt(h_ijk^2 / (eta_eff rho)) *
    integral of E_i dw_j/dr_k, with V_mn the geometric mean of the two mode
    volumes.  Fields must carry their frequencies; ``component`` is the
    1-based (i, j, k) selection.
    """
    _require_matching(e, w)
    if e.frequency <= 0 or w.frequency <= 0:
        raise ParameterError("both mode frequencies must be set and positive")
    i, j, k = component
    h = mat.h_element(i, j, k)
    if v_eff_em is None:
        v_eff_em = em_mode_volume(e, mat.eta_eff)
    if v_eff_mech is None:
        v_eff_mech = mech_mode_volume(w)
    v_mn = math.sqrt(v_eff_em * v_eff_mech)
    grads = strain_field(w)
    integral = overlap_integral(e, grads, j, k, component=i)
    prefactor = (
        1j * math.sqrt(e.frequency / w.frequency) / (4 * v_mn)
        * math.sqrt(h**2 / (mat.eta_eff * mat.rho))
    )
    return prefactor * integral


def piezo_coupling_total(e: ModeField, w: ModeField, mat: MaterialTensorSet,
                         v_eff_em: float | None = None,
                         v_eff_mech: float | None = None) -> complex:
    """Full-tensor piezoelectric coupling: signed sum of h_ijk-weighted overlaps.

    Reduces to :func:`piezo_coupling` (up to the sign of h_ijk) when a single
    tensor element is nonzero.  Unknown (NaN) elements raise only when the
    corresponding overlap would contribute.
    """
    _require_matching(e, w)
    if e.frequency <= 0 or w.frequency <= 0:
        raise ParameterError("both mode frequencies must be set and positive")
    if mat.h is None:
        raise MaterialDataError("piezoelectric tensor h is not set")
    if v_eff_em is None:
        v_eff_em = em_mode_volume(e, mat.eta_eff)
    if v_eff_mech is None:
        v_eff_mech = mech_mode_volume(w)
    v_mn = math.sqrt(v_eff_em * v_eff_mech)
    grads = strain_field(w)
    total = 0j
    for i in range(1, 4):
        for j in range(1, 4):
            for k in range(1, 4):
                h = float(mat.h[i - 1, voigt_index(j, k) - 1])
                if h == 0.0:
                    continue
                integral = overlap_integral(e, grads, j, k, component=i)
                if math.isnan(h):
                    if integral != 0:
                        raise MaterialDataError(
                            f"piezoelectric element h_{i}{j}{k} is unknown but its "
                            "overlap integral is nonzero"
                        )
                    continue
                total += h * integral
    prefactor = (
        1j * math.sqrt(e.frequency / w.frequency) / (4 * v_mn)
        / math.sqrt(mat.eta_eff * mat.rho)
    )
    return prefactor * total


def optomech_coupling(e: ModeField, w: ModeField, mat: MaterialTensorSet,
                      omega_mech: float | None = None,
                      v_eff_em: float | None = None,
                      v_eff_mech: float | None = None) -> float:
    """Single-photon optomechanical coupling rate between an EM and a mechanical mode.

    sqrt(hbar / (32 rho V_mech eps0^2 eta_eff^2 V_em^2 omega_mech)) times the
    photoelastic overlap sum p_ijkl integral of E_i E_j* dw_k/dr_l.  The
    optical field enters as E E*, so the result is independent of its global
    phase; the magnitude of the (generally complex) overlap sum is returned.
    """
    _require_matching(e, w)
    if mat.p is None:
        raise MaterialDataError("photoelastic tensor p is not set")
    if omega_mech is None:
        omega_mech = w.frequency
    if omega_mech <= 0:
        raise ParameterError("mechanical frequency must be positive")
    if v_eff_em is None:
        v_eff_em = em_mode_volume(e, mat.eta_eff)
    if v_eff_mech is None:
        v_eff_mech = mech_mode_volume(w)
    grads = strain_field(w)
    total = 0j
    for i in range(3):
        for j in range(3):
            ee = e.components[i] * np.conj(e.components[j])
            for k in range(3):
                for l in range(3):
                    p_el = float(mat.p[voigt_index(i + 1, j + 1) - 1,
                                       voigt_index(k + 1, l + 1) - 1])
                    if math.isnan(p_el):
                        raise MaterialDataError(
                            f"photoelastic element p_{i+1}{j+1}{k+1}{l+1} is unknown"
                        )
                    if p_el == 0.0:
                        continue
                    total += p_el * complex(trapezoid_3d(ee * grads[k, l], e.grid))
    prefactor = math.sqrt(
        HBAR / (32 * mat.rho * v_eff_mech * EPSILON_0**2
                * mat.eta_eff**2 * v_eff_em**2 * omega_mech)
    )
    return prefactor * abs(total)


def gamma_ex_from_gem(g_em: float, Gamma: float, Gamma_ex: float) -> float:
    """External microwave-mechanical coupling 4 g_em^2 Gamma_ex / Gamma^2."""
    if Gamma <= 0:
        raise ParameterError("Gamma must be > 0")
    if not 0 <= Gamma_ex <= Gamma:
        raise ParameterError("Gamma_ex must satisfy 0 <= Gamma_ex <= Gamma")
    return 4 * g_em**2 * Gamma_ex / Gamma**2


# --- analytic mode library -----------------------------------------------------


def plane_wave(grid: Grid3D, kind: str, frequency: float, amplitude: complex,
               wavevector: Sequence[float], polarization: int) -> ModeField:
    """Single-polarization plane wave A e^{i q . r} along one Cartesian axis."""
    x, y, z = grid.meshgrid()
    qx, qy, qz = wavevector
    phase = np.exp(1j * (qx * x + qy * y + qz * z))
    comps = np.zeros((3, *grid.shape), dtype=complex)
    comps[polarization] = amplitude * phase
    return ModeField(grid, comps, kind, frequency)


def top_hat(grid: Grid3D, kind: str, frequency: float, amplitude: complex,
            polarization: int, lo: Sequence[float], hi: Sequence[float]) -> ModeField:
    """Uniform field on the axis-aligned box [lo, hi], zero outside."""
    x, y, z = grid.meshgrid()
    inside = (
        (x >= lo[0]) & (x <= hi[0])
        & (y >= lo[1]) & (y <= hi[1])
        & (z >= lo[2]) & (z <= hi[2])
    )
    comps = np.zeros((3, *grid.shape), dtype=complex)
    comps[polarization] = amplitude * inside
    return ModeField(grid, comps, kind, frequency)


def gaussian_sheet(grid: Grid3D, kind: str, frequency: float, amplitude: complex,
                   polarization: int, axis: int, center: float, width: float) -> ModeField:
    """Field concentrated in a Gaussian sheet transverse to one axis."""
    coords = grid.meshgrid()[axis]
    comps = np.zeros((3, *grid.shape), dtype=complex)
    comps[polarization] = amplitude * np.exp(-((coords - center) / width) ** 2)
    return ModeField(grid, comps, kind, frequency)


# --- field file I/O -------------------------------------------------------------


def save_mode_field(path, f: ModeField) -> None:
    """Columnar CSV export with grid metadata on a comment header line."""
    g = f.grid
    header_meta = (
        "# origin={0},{1},{2} spacing={3},{4},{5} counts={6},{7},{8} "
        "kind={9} frequency={10!r}"
    ).format(*g.origin, *g.spacing, *g.counts, f.kind, f.frequency)
    x, y, z = g.meshgrid()
    cols = [x.ravel(), y.ravel(), z.ravel()]
    for c in range(3):
        cols.append(f.components[c].real.ravel())
        cols.append(f.components[c].imag.ravel())
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(header_meta + "\n")
        fh.write("x,y,z,Re_fx,Im_fx,Re_fy,Im_fy,Re_fz,Im_fz\n")
        for row in zip(*cols):
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def load_mode_field(path) -> ModeField:
    """Read a mode field written by :func:`save_mode_field`."""
    with open(path, "r", encoding="utf-8") as fh:
        meta_line = fh.readline().strip()
        if not meta_line.startswith("#"):
            raise ParameterError("mode field file must start with a '# origin=...' header")
        meta = {}
        for token in meta_line.lstrip("#").split():
            key, _, raw = token.partition("=")
            meta[key] = raw
        try:
            origin = tuple(float(v) for v in meta["origin"].split(","))
            spacing = tuple(float(v) for v in meta["spacing"].split(","))
            counts = tuple(int(v) for v in meta["counts"].split(","))
            kind = meta["kind"]
            frequency = float(meta["frequency"])
        except (KeyError, ValueError) as exc:
            raise ParameterError(f"malformed mode field header: {meta_line!r}") from exc
        fh.readline()  # column header
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    grid = Grid3D(origin, spacing, counts)
    expected = math.prod(counts)
    if data.shape != (expected, 9):
        raise ParameterError(
            f"mode field file has shape {data.shape}, expected ({expected}, 9)"
        )
    comps = np.empty((3, *counts), dtype=complex)
    for c in range(3):
        comps[c] = (data[:, 3 + 2 * c] + 1j * data[:, 4 + 2 * c]).reshape(counts)
    return ModeField(grid, comps, kind, frequency)
