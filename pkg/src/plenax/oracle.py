"""Independent ray-trace check of the virtual camera model, plus a renderer.

Everything in this module deliberately avoids the closed-form expressions in
raymodel. Rays are pushed through the optical train one element at a time
(translate, refract, translate, ...), micro lenses are traced as their actual
refracting surfaces whenever a prescription is available, and quantities such
as the pupil location, camera positions, baselines and triangulated distances
are recovered by brute-force intersection of the traced object-space lines.
Agreement between the two routes is a regression check on both.

The trace state is (height, slope) with slopes stored as reduced angles, so a
translation inside glass advances by thickness / index and a surface applies
slope -= (height - center) * power. In air the reduced angle equals the
geometric slope.

The same machinery renders synthetic raw images: textured frontal planes are
sampled along every traced chief ray and assembled into the mosaic layout
that lightfield.decode expects, which gives the matching pipeline a ground
truth with a known disparity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lightfield import RawLightFieldImage, read_pgm
from .optics import INFINITY, CameraConfig, FocusState, MicroLensSpec, derive_focus_state

# 80-bit floats keep intersection scatter far below the equivalence bounds.
_TRACE_DTYPE = np.longdouble


@dataclass(frozen=True)
class Translation:
    """Free advance along the axis; in glass, pass the reduced thickness."""

    distance_mm: float


@dataclass(frozen=True)
class Refraction:
    """Thin refracting surface. center_mm decenters it off the global axis."""

    power_per_mm: float
    center_mm: float | np.ndarray = 0.0


@dataclass(frozen=True)
class TracedRay:
    height_mm: float | np.ndarray
    slope: float | np.ndarray


def trace(ray: TracedRay, elements) -> TracedRay:
    """Push a ray through elements in order.

    Heights and slopes may be arrays; every element then acts elementwise.
    """
    h = ray.height_mm
    u = ray.slope
    for el in elements:
        if isinstance(el, Translation):
            h = h + u * el.distance_mm
        elif isinstance(el, Refraction):
            u = u - (h - el.center_mm) * el.power_per_mm
        else:
            raise TypeError(f"unknown element {el!r}")
    return TracedRay(height_mm=h, slope=u)


def mla_surface_elements(mla: MicroLensSpec, center_mm: float | np.ndarray = 0.0):
    """Surface sequence of one lenslet, in front-to-back traversal order.

    With a full prescription this is refraction, reduced-thickness advance,
    refraction; without one the lenslet degenerates to a single thin surface.
    """
    if mla.thickness_mm is None:
        return (Refraction(1.0 / mla.focal_length_mm, center_mm),)
    n = mla.refractive_index
    front = (n - 1.0) / mla.radius_front_mm if math.isfinite(mla.radius_front_mm) else 0.0
    back = (1.0 - n) / mla.radius_back_mm if math.isfinite(mla.radius_back_mm) else 0.0
    return (
        Refraction(front, center_mm),
        Translation(mla.thickness_mm / n),
        Refraction(back, center_mm),
    )


@dataclass(frozen=True)
class _Geometry:
    """Axial positions (z from the sensor, increasing toward the scene)."""

    exit_vertex_z_mm: float  # last lenslet surface on the scene side
    lens_plane_z_mm: float  # aim target: object-side principal plane column
    pupil_z_mm: float
    main_lens_z_mm: float
    sensor_gap_mm: float  # sensor to first lenslet surface
    glass_mm: float  # reduced in-glass advance, 0 for a thin lenslet


def _geometry(state: FocusState, config: CameraConfig) -> _Geometry:
    mla = config.mla
    f_s = mla.focal_length_mm
    if mla.thickness_mm is None:
        lens_plane = exit_vertex = f_s
        sensor_gap = f_s
        glass = 0.0
    else:
        n = mla.refractive_index
        front = (n - 1.0) / mla.radius_front_mm if math.isfinite(mla.radius_front_mm) else 0.0
        back = (1.0 - n) / mla.radius_back_mm if math.isfinite(mla.radius_back_mm) else 0.0
        power = front + back - front * back * mla.thickness_mm / n
        f = 1.0 / power
        # Vertex offsets of the principal planes; the sensor sits one focal
        # length behind the image-side plane, so the vertices land here.
        h1_from_front = f * back * mla.thickness_mm / n
        h2_from_back = -f * front * mla.thickness_mm / n
        sensor_gap = f_s + h2_from_back
        exit_vertex = sensor_gap + mla.thickness_mm
        lens_plane = exit_vertex - h1_from_front
        glass = mla.thickness_mm / n
    return _Geometry(
        exit_vertex_z_mm=exit_vertex,
        lens_plane_z_mm=lens_plane,
        pupil_z_mm=lens_plane + state.d_ap_mm,
        main_lens_z_mm=lens_plane + state.b_u_mm,
        sensor_gap_mm=sensor_gap,
        glass_mm=glass,
    )


def _forward_elements(geom: _Geometry, mla: MicroLensSpec, centers):
    surfaces = mla_surface_elements(mla, centers)
    if len(surfaces) == 1:
        return (Translation(geom.sensor_gap_mm), surfaces[0])
    front, advance, back = surfaces
    # Sensor-to-scene traversal meets the back surface first.
    return (Translation(geom.sensor_gap_mm), back, advance, front)


def _micro_image_centers(s, state: FocusState, config: CameraConfig, geom: _Geometry):
    """Sensor landing points of the pupil-center rays, one per lenslet.

    Traced from the pupil center back through the decentered surfaces; the
    aiming line passes each lenslet's principal point, which is the traced
    counterpart of a pinhole at the lenslet center.
    """
    surfaces = mla_surface_elements(config.mla, s)
    lead_in = Translation(geom.pupil_z_mm - geom.exit_vertex_z_mm)
    tail = Translation(geom.sensor_gap_mm)
    slope = s / np.asarray(state.d_ap_mm, dtype=s.dtype)
    ray = trace(TracedRay(np.zeros_like(s), slope), (lead_in, *surfaces, tail))
    return ray.height_mm


def _chief_rays(i, j, state: FocusState, config: CameraConfig, dtype=_TRACE_DTYPE):
    """Object-space chief rays for micro image samples (i, j).

    i and j broadcast. Returns (slope, height at the main lens object-side
    principal plane), so each ray is the line slope * z + height with z
    measured from that plane.

    The chief ray through sensor point u is pinned down by aiming: its
    object-side line must cross the lenslet principal plane at the lenslet
    center. The trace is affine in the launch slope, so two trial traces
    solve the aim exactly.
    """
    i = np.asarray(i, dtype=dtype)
    j = np.asarray(j, dtype=dtype)
    offset = dtype((config.mla.count_h - 1) / 2.0)
    s = (j - offset) * dtype(config.mla.pitch_mm)
    i, s = np.broadcast_arrays(i, s)
    geom = _geometry(state, config)
    u = _micro_image_centers(s, state, config, geom) + i * dtype(config.sensor.pixel_pitch_mm)

    elements = _forward_elements(geom, config.mla, s)
    reach_back = geom.lens_plane_z_mm - geom.exit_vertex_z_mm

    def line_height_at_plane(slope):
        out = trace(TracedRay(u, slope), elements)
        return out.height_mm + out.slope * reach_back, out

    h0, _ = line_height_at_plane(np.zeros_like(u))
    h1, _ = line_height_at_plane(np.ones_like(u))
    gain = h1 - h0
    if np.any(gain == 0):
        raise ValueError("degenerate lenslet geometry, cannot aim chief rays")
    aimed, out = line_height_at_plane((s - h0) / gain)

    height_at_main = out.height_mm + out.slope * (geom.main_lens_z_mm - geom.exit_vertex_z_mm)
    slope_obj = out.slope - height_at_main / dtype(config.main_lens.focal_length_mm)
    return slope_obj, height_at_main


def _intersect(q1, u1, q2, u2):
    dq = q1 - q2
    if np.any(dq == 0):
        raise ValueError("parallel rays do not intersect")
    z = (u2 - u1) / dq
    return z, q1 * z + u1


@dataclass(frozen=True)
class VirtualCameraSimulation:
    """Brute-force reconstruction of the virtual camera array.

    positions_mm[c + i] is viewpoint i; intersection_spread_mm is the widest
    deviation of any adjacent-lenslet ray crossing from its viewpoint mean,
    in either coordinate.
    """

    entrance_pupil_to_h1_mm: float
    positions_mm: tuple
    tilt_angles_rad: tuple
    intersection_spread_mm: float


def simulate_virtual_cameras(
    config: CameraConfig, state: FocusState | None = None
) -> VirtualCameraSimulation:
    """Locate every viewpoint by intersecting all adjacent-lenslet ray pairs."""
    if state is None:
        state = derive_focus_state(config)
    c = config.sensor.half_span
    count = config.mla.count_h
    j = np.arange(count, dtype=_TRACE_DTYPE)

    positions = []
    tilts = []
    spread = _TRACE_DTYPE(0.0)
    z_all = []
    for i in range(-c, c + 1):
        q, u = _chief_rays(_TRACE_DTYPE(i), j, state, config)
        z, x = _intersect(q[:-1], u[:-1], q[1:], u[1:])
        x_mean = x.mean()
        spread = max(spread, np.abs(x - x_mean).max())
        z_all.append(z)
        positions.append(float(x_mean))
        tilts.append(float(np.arctan(q[(count - 1) // 2])))
    z_all = np.concatenate(z_all)
    z_mean = z_all.mean()
    spread = max(spread, np.abs(z_all - z_mean).max())
    return VirtualCameraSimulation(
        entrance_pupil_to_h1_mm=float(z_mean),
        positions_mm=tuple(positions),
        tilt_angles_rad=tuple(tilts),
        intersection_spread_mm=float(spread),
    )


def simulate_distance(
    config: CameraConfig,
    gap: int,
    delta_x_px: float,
    state: FocusState | None = None,
) -> float:
    """Distance at which two viewpoints see one point delta_x pixels apart.

    Intersects the chief ray of viewpoint i through the central lenslet with
    the ray of viewpoint i + gap through the lenslet delta_x further down,
    for the centred pair i = -(gap // 2). The intersection is referred to
    the traced entrance pupil. Rays whose slopes agree to within float
    resolution are parallel and the point is at infinity.
    """
    if gap < 1:
        raise ValueError(f"gap must be >= 1, got {gap}")
    if not math.isfinite(delta_x_px):
        raise ValueError(f"delta_x must be finite, got {delta_x_px}")
    if state is None:
        state = derive_focus_state(config)
    i_low = -(gap // 2)
    if abs(i_low) > config.sensor.half_span or abs(i_low + gap) > config.sensor.half_span:
        raise ValueError(f"gap {gap} exceeds the micro image span")
    centre = (config.mla.count_h - 1) / 2.0
    q1, u1 = _chief_rays(_TRACE_DTYPE(i_low), _TRACE_DTYPE(centre), state, config)
    q2, u2 = _chief_rays(
        _TRACE_DTYPE(i_low + gap), _TRACE_DTYPE(centre) - _TRACE_DTYPE(delta_x_px),
        state, config,
    )
    if abs(q1 - q2) <= 1e-12 * max(1.0, abs(q1), abs(q2)):
        return INFINITY
    z = (u2 - u1) / (q1 - q2)
    pupil = simulate_virtual_cameras(config, state).entrance_pupil_to_h1_mm
    return float(z - _TRACE_DTYPE(pupil))


# ---------------------------------------------------------------------------
# Synthetic scenes


@dataclass(frozen=True)
class ScenePlane:
    """Textured frontal plane at depth_mm in front of the entrance pupil.

    texture is "checker" (argument_mm = square period) or "file" (a graymap
    sampled nearest-neighbour with argument_mm per texture pixel, tiled).
    band, when set, restricts the plane to x in [band[0], band[1]] mm and
    leaves everything outside transparent.
    """

    depth_mm: float
    texture: str
    argument_mm: float
    path: str | None = None
    band: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not (math.isfinite(self.depth_mm) and self.depth_mm > 0):
            raise ValueError(f"plane depth must lie in front of the pupil, got {self.depth_mm}")
        if self.texture not in ("checker", "file"):
            raise ValueError(f"unknown texture {self.texture!r}")
        if not (math.isfinite(self.argument_mm) and self.argument_mm > 0):
            raise ValueError(f"texture scale must be positive, got {self.argument_mm}")
        if self.texture == "file" and not self.path:
            raise ValueError("file texture needs a path")
        if self.band is not None and not self.band[0] < self.band[1]:
            raise ValueError(f"empty band {self.band}")


def parse_scene(text: str) -> tuple[ScenePlane, ...]:
    """Parse a scene description.

    One plane per line:
        plane <depth_mm> checker <period_mm> [band <x_from> <x_to>]
        plane <depth_mm> file <path> <mm_per_pixel> [band <x_from> <x_to>]
    Blank lines and lines starting with '#' are skipped.
    """
    planes = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.strip()
        if not line or line.startswith("#"):
            continue
        tokens = line.split()
        try:
            if tokens[0] != "plane":
                raise ValueError(f"expected 'plane', got {tokens[0]!r}")
            depth = float(tokens[1])
            kind = tokens[2]
            if kind == "checker":
                plane = dict(depth_mm=depth, texture="checker", argument_mm=float(tokens[3]))
                rest = tokens[4:]
            elif kind == "file":
                plane = dict(
                    depth_mm=depth, texture="file", path=tokens[3], argument_mm=float(tokens[4])
                )
                rest = tokens[5:]
            else:
                raise ValueError(f"unknown texture {kind!r}")
            if rest:
                if rest[0] != "band" or len(rest) != 3:
                    raise ValueError(f"trailing tokens {rest}")
                plane["band"] = (float(rest[1]), float(rest[2]))
            planes.append(ScenePlane(**plane))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"scene line {lineno}: {exc}") from exc
    if not planes:
        raise ValueError("scene describes no planes")
    return tuple(planes)


def _texture_sampler(plane: ScenePlane, base_dir: Path | None):
    """Build sample(x, y) -> grid of texture values at the outer product."""
    if plane.texture == "checker":
        period = plane.argument_mm

        def sample(x, y):
            cells = np.floor(x[None, :] / period) + np.floor(y[:, None] / period)
            return (cells % 2.0).astype(np.float64)

        return sample

    path = Path(plane.path)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    samples, maxval = read_pgm(path)
    image = samples.astype(np.float64) / maxval
    scale = plane.argument_mm

    def sample(x, y):
        col = np.floor(x / scale).astype(np.int64) % image.shape[1]
        row = np.floor(y / scale).astype(np.int64) % image.shape[0]
        return image[row[:, None], col[None, :]]

    return sample


def render_synthetic_scene(
    config: CameraConfig,
    planes,
    state: FocusState | None = None,
    base_dir: str | Path | None = None,
    background: float = 0.0,
) -> RawLightFieldImage:
    """Project textured planes through every viewpoint into a raw mosaic.

    Each raw pixel holds the texture value where its traced chief ray meets
    the nearest plane covering it; rays that miss every plane get the
    background value. Inverse of lightfield.decode by construction: sample
    (i, g) under lenslet column j, row h lands at mosaic position
    (h * m + c + g, j * m + c + i).
    """
    if state is None:
        state = derive_focus_state(config)
    planes = sorted(planes, key=lambda p: p.depth_mm)
    base = Path(base_dir) if base_dir is not None else None
    samplers = [_texture_sampler(p, base) for p in planes]

    pupil_z = simulate_virtual_cameras(config, state).entrance_pupil_to_h1_mm
    m = config.sensor.micro_image_px
    c = config.sensor.half_span
    i_all = np.arange(-c, c + 1, dtype=np.float64)
    j_all = np.arange(config.mla.count_h, dtype=np.float64)
    h_all = np.arange(config.mla.count_v, dtype=np.float64)

    # x depends only on the mosaic column, y only on the row, so each plane
    # is sampled on an outer product of two 1-D coordinate arrays.
    qx, ux = _chief_rays(i_all[:, None], j_all[None, :], state, config, dtype=np.float64)
    # Row geometry mirrors column geometry about the (possibly fractional)
    # vertical centre; reuse of the column trace keeps one code path.
    row_offset = (config.mla.count_v - config.mla.count_h) / 2.0
    qy, uy = _chief_rays(
        i_all[:, None], h_all[None, :] - row_offset, state, config, dtype=np.float64
    )

    width = config.image_width_px
    height = config.image_height_px
    cols = np.empty((len(planes), width))
    rows = np.empty((len(planes), height))
    for p, plane in enumerate(planes):
        z_plane = pupil_z + plane.depth_mm
        for idx, i in enumerate(range(-c, c + 1)):
            cols[p, np.arange(config.mla.count_h) * m + c + i] = qx[idx] * z_plane + ux[idx]
            rows[p, np.arange(config.mla.count_v) * m + c + i] = qy[idx] * z_plane + uy[idx]

    raw = np.full((height, width), float(background))
    owner = np.full(width, -1, dtype=np.int64)
    for p, plane in enumerate(planes):
        free = owner < 0
        if plane.band is not None:
            free &= (cols[p] >= plane.band[0]) & (cols[p] <= plane.band[1])
        owner[free] = p
        if free.any():
            raw[:, free] = samplers[p](cols[p, free], rows[p])
    return RawLightFieldImage(samples=raw, config=config)
