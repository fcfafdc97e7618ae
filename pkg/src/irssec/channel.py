"""Propagation model: path loss, planar-array steering, Rician fading, scenarios.

All powers are handled internally in linear watts. dBm/dB strings are accepted
only at the configuration boundary (e.g. ``"-80 dBm"`` for a noise power).
Channel draws are deterministic for a fixed ``numpy.random.Generator`` state.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

# Rician factors at or above this value short-circuit to the pure LoS channel.
PURE_LOS_KAPPA = 1e12


class ScenarioError(ValueError):
    """Inconsistent or unusable scenario configuration."""


def parse_power_w(value) -> float:
    """Parse a power given in watts or as a string with a dBm/dB suffix.

    ``"-80 dBm"`` -> 1e-11 W, ``"0 dB"`` -> 1 W (dB is read as dBW).
    Plain numbers pass through as watts.
    """
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        text = value.strip().lower().replace(" ", "")
        if text.endswith("dbm"):
            return 10.0 ** ((float(text[:-3]) - 30.0) / 10.0)
        if text.endswith("dbw"):
            return 10.0 ** (float(text[:-3]) / 10.0)
        if text.endswith("db"):
            return 10.0 ** (float(text[:-2]) / 10.0)
        return float(text)
    raise ScenarioError(f"cannot parse power value {value!r}")


def path_loss_db(d: float, a: float, l0: float = 30.0, d0: float = 1.0) -> float:
    """Log-distance path loss L(d) = l0 + 10*a*log10(d/d0) in dB."""
    if d <= 0 or d0 <= 0:
        raise ValueError(f"distances must be positive, got d={d}, d0={d0}")
    return l0 + 10.0 * a * math.log10(d / d0)


def amplitude_from_loss_db(loss_db: float) -> float:
    """Field amplitude scale sqrt(10^(-L/10)) for a path loss in dB."""
    return 10.0 ** (-loss_db / 20.0)


def upa_response(phi: float, omega: float, n_y: int, n_z: int,
                 spacing_ratio: float = 0.5) -> np.ndarray:
    """Steering vector of an n_y-by-n_z planar array in the yz-plane.

    The entry for grid index (iy, iz), iy = 0..n_y-1 and iz = 0..n_z-1, is
    exp(j*2*pi*spacing_ratio*(iy*sin(phi)*sin(omega) + iz*cos(omega))) / sqrt(N),
    where phi is the azimuth and omega the elevation of the ray; the first
    element is the phase reference. The vector has unit Euclidean norm; iz
    varies fastest.
    """
    if n_y < 1 or n_z < 1:
        raise ValueError("array dimensions must be >= 1")
    iy = np.arange(n_y)
    iz = np.arange(n_z)
    phase = 2.0 * np.pi * spacing_ratio * (
        iy[:, None] * math.sin(phi) * math.sin(omega) + iz[None, :] * math.cos(omega)
    )
    n_t = n_y * n_z
    return (np.exp(1j * phase) / math.sqrt(n_t)).reshape(n_t)


def draw_rician(los: np.ndarray, kappa: float, rng: np.random.Generator) -> np.ndarray:
    """Rician fade sqrt(k/(1+k))*los + sqrt(1/(1+k))*w with w ~ CN(0, I).

    kappa >= PURE_LOS_KAPPA returns the LoS component exactly (and consumes no
    randomness, so the pure-LoS limit is seed independent).
    """
    if kappa < 0:
        raise ValueError("Rician factor must be nonnegative")
    los = np.asarray(los, dtype=complex)
    if kappa >= PURE_LOS_KAPPA:
        return los.copy()
    w = (rng.standard_normal(los.shape) + 1j * rng.standard_normal(los.shape)) / math.sqrt(2.0)
    return math.sqrt(kappa / (1.0 + kappa)) * los + math.sqrt(1.0 / (1.0 + kappa)) * w


@dataclass
class ScenarioConfig:
    """Geometry and radio parameters of one simulation scenario.

    ``user_positions[0]`` is always the confidential-service user. Distances
    and LoS angles are derived from the coordinates unless ``distance_overrides``
    supplies them explicitly (used to reproduce tabulated setups whose stated
    link distances differ from the raw coordinate geometry).
    """

    ap_position: np.ndarray
    irs_position: np.ndarray
    user_positions: list
    n_y: int
    n_z: int
    noise_powers_w: list
    total_power_w: float
    element_spacing_over_wavelength: float = 0.5
    rician_kappa: float = 10.0
    pathloss_exponent_direct: float = 3.75
    pathloss_exponent_irs: float = 2.2
    reference_loss_db: float = 30.0
    reference_distance_m: float = 1.0
    seed: int = 0
    distance_overrides: dict | None = None

    def __post_init__(self):
        self.ap_position = np.asarray(self.ap_position, dtype=float).reshape(3)
        self.irs_position = np.asarray(self.irs_position, dtype=float).reshape(3)
        self.user_positions = [np.asarray(p, dtype=float).reshape(3) for p in self.user_positions]
        if len(self.user_positions) < 2:
            raise ScenarioError("need at least 2 users (user 1 plus eavesdroppers)")
        self.noise_powers_w = [parse_power_w(p) for p in self.noise_powers_w]
        if len(self.noise_powers_w) != len(self.user_positions):
            raise ScenarioError("one noise power per user is required")
        if any(s <= 0 for s in self.noise_powers_w):
            raise ScenarioError("noise powers must be positive")
        self.total_power_w = parse_power_w(self.total_power_w)
        if self.total_power_w <= 0:
            raise ScenarioError("total power must be positive")
        if self.n_y < 1 or self.n_z < 1:
            raise ScenarioError("IRS grid dimensions must be >= 1")
        if self.rician_kappa < 0:
            raise ScenarioError("Rician factor must be nonnegative")
        if self.element_spacing_over_wavelength <= 0:
            raise ScenarioError("element spacing ratio must be positive")
        self.seed = int(self.seed)

    @property
    def n_elements(self) -> int:
        return self.n_y * self.n_z

    @property
    def n_users(self) -> int:
        return len(self.user_positions)


@dataclass
class ChannelSet:
    """One fading block: every propagation quantity the optimizer needs.

    g       complex (N,)  AP -> IRS
    m       complex (K, N), row k is the IRS -> user-k vector (used as m_k^H)
    h       complex (K,)  AP -> user-k direct channels
    sigma2  float (K,)    per-user noise powers in watts
    """

    g: np.ndarray
    m: np.ndarray
    h: np.ndarray
    sigma2: np.ndarray

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=complex).reshape(-1)
        self.m = np.atleast_2d(np.asarray(self.m, dtype=complex))
        self.h = np.asarray(self.h, dtype=complex).reshape(-1)
        self.sigma2 = np.asarray(self.sigma2, dtype=float).reshape(-1)
        if self.m.shape != (self.h.size, self.g.size):
            raise ValueError(f"inconsistent shapes: m {self.m.shape}, g {self.g.shape}, h {self.h.shape}")
        if self.sigma2.size != self.h.size:
            raise ValueError("one noise power per user is required")
        if np.any(self.sigma2 <= 0):
            raise ValueError("noise powers must be strictly positive")

    @property
    def n(self) -> int:
        return self.g.size

    @property
    def k(self) -> int:
        return self.h.size

    def with_confidential_user(self, index: int) -> "ChannelSet":
        """Reorder users so that user ``index`` becomes the confidential user."""
        order = [index] + [j for j in range(self.k) if j != index]
        return ChannelSet(self.g.copy(), self.m[order].copy(),
                          self.h[order].copy(), self.sigma2[order].copy())


def _angles_towards(origin: np.ndarray, target: np.ndarray):
    """Azimuth/elevation of the ray from origin to target in the global frame.

    Elevation is measured from the +z axis; azimuth in the xy-plane from +x.
    """
    u = target - origin
    d = float(np.linalg.norm(u))
    if d <= 0:
        raise ScenarioError("coincident terminals give an undefined ray")
    u = u / d
    omega = math.acos(np.clip(u[2], -1.0, 1.0))
    phi = math.atan2(u[1], u[0])
    return phi, omega


def _link_geometry(config: ScenarioConfig) -> dict:
    """Distances and LoS angles for every link, honoring overrides."""
    ov = config.distance_overrides or {}
    out = {}

    ap_irs = ov.get("ap_irs", {})
    d_ai = ap_irs.get("distance_m")
    if d_ai is None:
        d_ai = float(np.linalg.norm(config.irs_position - config.ap_position))
    if "azimuth_rad" in ap_irs:
        phi_ai, omega_ai = float(ap_irs["azimuth_rad"]), float(ap_irs["elevation_rad"])
    else:
        phi_ai, omega_ai = _angles_towards(config.irs_position, config.ap_position)
    out["ap_irs"] = (float(d_ai), phi_ai, omega_ai)

    ap_user = ov.get("ap_user_m", [None] * config.n_users)
    irs_user = ov.get("irs_user", [None] * config.n_users)
    out["ap_user"] = []
    out["irs_user"] = []
    for k in range(config.n_users):
        d = ap_user[k] if k < len(ap_user) and ap_user[k] is not None else None
        if d is None:
            d = float(np.linalg.norm(config.user_positions[k] - config.ap_position))
        out["ap_user"].append(float(d))

        entry = irs_user[k] if k < len(irs_user) else None
        entry = entry or {}
        d_iu = entry.get("distance_m")
        if d_iu is None:
            d_iu = float(np.linalg.norm(config.user_positions[k] - config.irs_position))
        if "azimuth_rad" in entry:
            phi, omega = float(entry["azimuth_rad"]), float(entry["elevation_rad"])
        else:
            phi, omega = _angles_towards(config.irs_position, config.user_positions[k])
        out["irs_user"].append((float(d_iu), phi, omega))

    for name, d in [("ap_irs", out["ap_irs"][0])] + [(f"ap_user{k}", out["ap_user"][k]) for k in range(config.n_users)] \
            + [(f"irs_user{k}", out["irs_user"][k][0]) for k in range(config.n_users)]:
        if d <= 0:
            raise ScenarioError(f"link {name} has non-positive distance {d}")
    return out


def generate_channels(config: ScenarioConfig, rng: np.random.Generator | None = None) -> ChannelSet:
    """Draw one fading block for the configured scenario.

    Each link amplitude is sqrt(10^(-L(d)/10)) applied to a Rician draw. The
    AP-IRS link uses the receive steering vector as its LoS component, the
    IRS-user links use the transmit steering vector, and the direct AP-user
    links use LoS component 1. Steering-vector LoS components are rescaled to
    per-element unit power (sqrt(N) times the unit-norm steering vector) so
    that every link entry has mean power 10^(-L/10) at any Rician factor,
    matching the unit-variance scattered part. Draw order is fixed: h_1..h_K
    first, then g, then m_1..m_K. The direct channels consume a
    surface-size-independent amount of randomness, so regenerating with the
    same seed and a different element count keeps the direct channels
    identical.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    geo = _link_geometry(config)
    kappa = config.rician_kappa
    s = config.element_spacing_over_wavelength
    l0, d0 = config.reference_loss_db, config.reference_distance_m

    h = np.empty(config.n_users, dtype=complex)
    for k in range(config.n_users):
        amp = amplitude_from_loss_db(
            path_loss_db(geo["ap_user"][k], config.pathloss_exponent_direct, l0, d0))
        h[k] = amp * draw_rician(np.ones(1), kappa, rng)[0]

    unit_power = math.sqrt(config.n_elements)
    d_ai, phi_ai, omega_ai = geo["ap_irs"]
    amp_g = amplitude_from_loss_db(path_loss_db(d_ai, config.pathloss_exponent_irs, l0, d0))
    los_g = unit_power * upa_response(phi_ai, omega_ai, config.n_y, config.n_z, s)
    g = amp_g * draw_rician(los_g, kappa, rng)

    m_rows = []
    for k in range(config.n_users):
        d_iu, phi, omega = geo["irs_user"][k]
        amp = amplitude_from_loss_db(path_loss_db(d_iu, config.pathloss_exponent_irs, l0, d0))
        los = unit_power * upa_response(phi, omega, config.n_y, config.n_z, s)
        m_rows.append(amp * draw_rician(los, kappa, rng))

    return ChannelSet(g=g, m=np.vstack(m_rows), h=h, sigma2=np.array(config.noise_powers_w))


def two_user_scenario(d1: float = 20.0, n_y: int = 5, n_z: int = 2,
                      rician_kappa: float = 10.0, total_power_w: float = 1.0,
                      noise: str = "-80 dBm", seed: int = 0) -> ScenarioConfig:
    """Two-user benchmark layout: AP at (0,0,30), IRS at (30,0,30), user 2 at
    (30,0,-10), user 1 at (0,0,d1), with the tabulated link distances and LoS
    angles installed as overrides (the table treats d1 as a horizontal offset
    from the AP, which differs from the raw coordinates for the direct link).
    """
    # Quadrant-aware arctangent keeps d1 = 30 finite: phi -> pi/2 - pi/4.
    phi_u1 = math.atan2(30.0, 30.0 - d1) - math.pi / 4.0
    overrides = {
        "ap_irs": {"distance_m": 30.0, "azimuth_rad": -math.pi / 4.0, "elevation_rad": math.pi / 2.0},
        "ap_user_m": [math.sqrt(30.0 ** 2 + d1 ** 2), 50.0],
        "irs_user": [
            {"distance_m": math.sqrt(30.0 ** 2 + (30.0 - d1) ** 2),
             "azimuth_rad": phi_u1, "elevation_rad": math.pi / 2.0},
            {"distance_m": 40.0, "azimuth_rad": math.pi / 4.0, "elevation_rad": math.pi / 2.0},
        ],
    }
    return ScenarioConfig(
        ap_position=[0.0, 0.0, 30.0], irs_position=[30.0, 0.0, 30.0],
        user_positions=[[0.0, 0.0, d1], [30.0, 0.0, -10.0]],
        n_y=n_y, n_z=n_z, noise_powers_w=[noise, noise],
        total_power_w=total_power_w, rician_kappa=rician_kappa, seed=seed,
        distance_overrides=overrides)


def multi_user_scenario(n_users: int = 4, n_y: int = 5, n_z: int = 2,
                        rician_kappa: float = 10.0, total_power_w: float = 1.0,
                        noise: str = "-80 dBm", seed: int = 0) -> ScenarioConfig:
    """Multi-user layout: user k sits at a horizontal ground offset of 10k m
    from the AP (AP and IRS as in the two-user layout). Link distances follow
    the same pattern as the two-user table with d1 -> 10k.
    """
    ap_user = []
    irs_user = []
    positions = []
    for k in range(1, n_users + 1):
        dk = 10.0 * k
        positions.append([0.0, 0.0, dk])
        ap_user.append(math.sqrt(30.0 ** 2 + dk ** 2))
        irs_user.append({
            "distance_m": math.sqrt(30.0 ** 2 + (30.0 - dk) ** 2),
            "azimuth_rad": math.atan2(30.0, 30.0 - dk) - math.pi / 4.0,
            "elevation_rad": math.pi / 2.0,
        })
    overrides = {
        "ap_irs": {"distance_m": 30.0, "azimuth_rad": -math.pi / 4.0, "elevation_rad": math.pi / 2.0},
        "ap_user_m": ap_user,
        "irs_user": irs_user,
    }
    return ScenarioConfig(
        ap_position=[0.0, 0.0, 30.0], irs_position=[30.0, 0.0, 30.0],
        user_positions=positions, n_y=n_y, n_z=n_z,
        noise_powers_w=[noise] * n_users, total_power_w=total_power_w,
        rician_kappa=rician_kappa, seed=seed, distance_overrides=overrides)


_SCENARIO_FIELDS = (
    "ap_position", "irs_position", "user_positions", "n_y", "n_z",
    "noise_powers_w", "total_power_w", "element_spacing_over_wavelength",
    "rician_kappa", "pathloss_exponent_direct", "pathloss_exponent_irs",
    "reference_loss_db", "reference_distance_m", "seed", "distance_overrides",
)


def scenario_from_dict(data: dict) -> ScenarioConfig:
    unknown = set(data) - set(_SCENARIO_FIELDS)
    if unknown:
        raise ScenarioError(f"unknown scenario fields: {sorted(unknown)}")
    try:
        return ScenarioConfig(**data)
    except TypeError as exc:
        raise ScenarioError(str(exc)) from exc


def scenario_to_dict(config: ScenarioConfig) -> dict:
    return {
        "ap_position": config.ap_position.tolist(),
        "irs_position": config.irs_position.tolist(),
        "user_positions": [p.tolist() for p in config.user_positions],
        "n_y": config.n_y,
        "n_z": config.n_z,
        "noise_powers_w": list(config.noise_powers_w),
        "total_power_w": config.total_power_w,
        "element_spacing_over_wavelength": config.element_spacing_over_wavelength,
        "rician_kappa": config.rician_kappa,
        "pathloss_exponent_direct": config.pathloss_exponent_direct,
        "pathloss_exponent_irs": config.pathloss_exponent_irs,
        "reference_loss_db": config.reference_loss_db,
        "reference_distance_m": config.reference_distance_m,
        "seed": config.seed,
        "distance_overrides": config.distance_overrides,
    }


def load_scenario(path) -> ScenarioConfig:
    """Load a scenario from a JSON file (field names as in ScenarioConfig)."""
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"scenario file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ScenarioError("scenario JSON must be an object")
    return scenario_from_dict(data)
