"""Chief ray geometry of the standard plenoptic camera.

Each pixel under a micro lens, taken together with that lens's optical
centre, fixes a chief ray. Rays sharing the same intra-micro-image offset i
leave the main lens through one common point on the entrance pupil, so every
viewpoint behaves like a pinhole camera sitting on the pupil. This module
computes those virtual camera positions, their tilt angles, the baselines
between them, and object distances triangulated from disparities, all in
closed form.

Coordinate conventions: the optical axis is z, increasing from the sensor
toward object space. Object-side ray heights are evaluated at a distance z
from the main lens's object-side principal plane. Lateral positions are x in
mm. Angles are radians internally.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .optics import CameraConfig, FocusState

INFINITY = math.inf


class ReferencePlane(Enum):
    """Plane a ray's intercept refers to."""

    MLA_PLANE = "mla_plane"
    MAIN_LENS_OBJECT_SIDE = "main_lens_object_side"


@dataclass(frozen=True)
class ChiefRay:
    """A ray as a linear height function of z.

    Attributes:
        slope: Rise in x per unit z.
        intercept_mm: Height where the ray crosses its reference plane.
        reference: Which plane z is measured from.
    """

    slope: float
    intercept_mm: float
    reference: ReferencePlane

    def __post_init__(self) -> None:
        if not (math.isfinite(self.slope) and math.isfinite(self.intercept_mm)):
            raise ValueError("ChiefRay requires finite slope and intercept")

    def height_at(self, z_mm: float) -> float:
        """Ray height x at axial distance z from the reference plane."""
        return self.slope * z_mm + self.intercept_mm


@dataclass(frozen=True)
class StereoRig:
    """Classical two-camera rig with optionally converging axes."""

    baseline_mm: float
    image_distance_mm: float
    tilt_rad: float = 0.0

    def __post_init__(self) -> None:
        if not self.baseline_mm > 0:
            raise ValueError(f"baseline_mm must be > 0, got {self.baseline_mm}")
        if not self.image_distance_mm > 0:
            raise ValueError(
                f"image_distance_mm must be > 0, got {self.image_distance_mm}"
            )


def stereo_depth(rig: StereoRig, delta_x_mm: float) -> float:
    """Depth of a point from its disparity on a classical stereo rig.

    Args:
        rig: Baseline, image distance, and symmetric inward tilt of the two
            cameras.
        delta_x_mm: Disparity as a physical displacement on the image plane.

    Returns:
        Z = b * B / (dx + b * tan(phi)), or math.inf when the denominator
        vanishes (the point where the rays run parallel).
    """
    denominator = delta_x_mm + rig.image_distance_mm * math.tan(rig.tilt_rad)
    if denominator == 0:
        return INFINITY
    return rig.image_distance_mm * rig.baseline_mm / denominator


def convergence_distance(rig: StereoRig) -> float:
    """Distance where the two tilted optical axes cross (inf if parallel)."""
    t = math.tan(rig.tilt_rad)
    if t == 0:
        return INFINITY
    return rig.baseline_mm / t


def _central_index(config: CameraConfig) -> float:
    return (config.mla.count_h - 1) / 2.0


def micro_lens_height(j: float, config: CameraConfig) -> float:
    """Height s_j of micro lens j's optical centre above the axis."""
    if not 0 <= j < config.mla.count_h:
        raise ValueError(f"micro lens index {j} outside [0, {config.mla.count_h})")
    return (j - _central_index(config)) * config.mla.pitch_mm


def mic_position(j: float, state: FocusState, config: CameraConfig) -> float:
    """Micro image centre under lens j.

    The centre is where the chief ray from the exit pupil's centre through
    the lens's optical centre meets the sensor, one micro lens focal length
    behind the MLA plane.
    """
    s_j = micro_lens_height(j, config)
    return (s_j / state.d_ap_mm) * config.mla.focal_length_mm + s_j


def micro_image_sample(
    j: float, i: int, state: FocusState, config: CameraConfig
) -> float:
    """Sensor position of the pixel at offset i from micro image centre j."""
    c = config.sensor.half_span
    if abs(i) > c:
        raise ValueError(f"viewpoint offset {i} outside [-{c}, {c}]")
    return mic_position(j, state, config) + i * config.sensor.pixel_pitch_mm


def chief_slope(j: float, i: int, state: FocusState, config: CameraConfig) -> float:
    """Image-side slope of the chief ray from sample (j, i) through lens j."""
    s_j = micro_lens_height(j, config)
    u = micro_image_sample(j, i, state, config)
    return (s_j - u) / config.mla.focal_length_mm


def object_ray(j: float, i: int, state: FocusState, config: CameraConfig) -> ChiefRay:
    """Object-space continuation of the chief ray from sample (j, i).

    The image-side ray travels from the MLA to the main lens plane, refracts
    once with the lens's power, and leaves through the object-side principal
    plane. The returned ray maps z (distance from that plane, positive
    toward the scene) to lateral height.
    """
    s_j = micro_lens_height(j, config)
    m = chief_slope(j, i, state, config)
    intercept = m * state.b_u_mm + s_j
    slope = m - intercept / config.main_lens.focal_length_mm
    return ChiefRay(
        slope=slope,
        intercept_mm=intercept,
        reference=ReferencePlane.MAIN_LENS_OBJECT_SIDE,
    )


def exit_pupil_baseline(
    i: int, gap: int, state: FocusState, config: CameraConfig
) -> float:
    """Image-side separation, at the exit pupil plane, of two viewpoints.

    The chief rays of offsets i and i + gap through the central micro lens
    pierce the exit pupil plane a distance apart that already reveals the
    baseline before any object-space construction.
    """
    o = _central_index(config)
    m_low = chief_slope(o, i, state, config)
    m_high = chief_slope(o, i + gap, state, config)
    return abs(m_high - m_low) * state.d_ap_mm


def entrance_pupil_distance(state: FocusState, config: CameraConfig) -> float:
    """Signed z of the entrance pupil from the object-side principal plane.

    All object-space rays of one viewpoint meet in a single axial plane; its
    position follows from intersecting the rays of two neighbouring micro
    lenses and is independent of the viewpoint, the lens pair, and the focus
    setting. Negative values place the pupil on the sensor side of the
    principal plane.

    Raises:
        ValueError: Degenerate optics with the pupil at infinity.
    """
    f_u = config.main_lens.focal_length_mm
    # delta is the focus-invariant offset between the exit pupil and the
    # image distance; see exit_pupil_at_focus.
    delta = state.d_ap_mm - state.b_u_mm
    if f_u + delta == 0:
        raise ValueError("entrance pupil lies at infinity for this lens")
    return f_u * delta / (f_u + delta)


@dataclass(frozen=True)
class VirtualCameraArray:
    """The viewpoints of one plenoptic capture as pinholes on the pupil.

    Attributes:
        positions_mm: A_i for i in [-c, c], lateral pinhole positions on the
            entrance pupil plane, ordered by i.
        tilt_angles_rad: Phi_i, each camera's optical axis angle. Positive
            tilt turns the axis of a positive-i camera toward the main axis.
        entrance_pupil_to_h1_mm: Signed z of the pupil plane, as returned by
            entrance_pupil_distance.
        virtual_image_distance_mm: b_n, the arbitrary distance of the
            virtual image plane behind the pupil. Every triangulated result
            is invariant to it.
        virtual_pixel_pitch_mm: p_n, one sub-aperture pixel projected onto
            the virtual image plane at distance b_n.
    """

    positions_mm: tuple[float, ...]
    tilt_angles_rad: tuple[float, ...]
    entrance_pupil_to_h1_mm: float
    virtual_image_distance_mm: float
    virtual_pixel_pitch_mm: float

    def __post_init__(self) -> None:
        n = len(self.positions_mm)
        if n != len(self.tilt_angles_rad) or n < 3 or n % 2 == 0:
            raise ValueError("positions and tilts must share an odd length >= 3")
        if not self.virtual_image_distance_mm > 0:
            raise ValueError("virtual_image_distance_mm must be > 0")
        steps = [
            self.positions_mm[k + 1] - self.positions_mm[k] for k in range(n - 1)
        ]
        if max(steps) - min(steps) > 1e-9:
            raise ValueError("virtual cameras are not equally spaced")
        if steps[0] == 0:
            raise ValueError("virtual cameras are degenerate (zero spacing)")

    @property
    def half_span(self) -> int:
        """Largest viewpoint index c."""
        return (len(self.positions_mm) - 1) // 2

    def _offset(self, i: int) -> int:
        c = self.half_span
        if abs(i) > c:
            raise ValueError(f"viewpoint index {i} outside [-{c}, {c}]")
        return i + c

    def position(self, i: int) -> float:
        """Pinhole position A_i on the pupil plane."""
        return self.positions_mm[self._offset(i)]

    def tilt(self, i: int) -> float:
        """Optical axis angle Phi_i in radians."""
        return self.tilt_angles_rad[self._offset(i)]


def build_virtual_camera_array(
    state: FocusState, config: CameraConfig, b_n_mm: float = 1.0
) -> VirtualCameraArray:
    """Locate every viewpoint's pinhole and axis on the entrance pupil.

    For each offset i the ray through the central micro lens is evaluated at
    the pupil plane, giving the pinhole position A_i; its slope gives the
    axis tilt. A virtual image plane at b_n behind the pupil carries the
    projected pixel pitch p_n used to convert disparities to millimetres.

    Args:
        state: Solved focus quantities for config.
        config: Camera description.
        b_n_mm: Virtual image distance, any positive value.

    Returns:
        The assembled VirtualCameraArray.
    """
    if not b_n_mm > 0:
        raise ValueError(f"b_n_mm must be > 0, got {b_n_mm}")
    z_pupil = entrance_pupil_distance(state, config)
    o = _central_index(config)
    c = config.sensor.half_span

    positions = []
    tilts = []
    for i in range(-c, c + 1):
        ray = object_ray(o, i, state, config)
        positions.append(ray.height_at(z_pupil))
        tilts.append(math.atan(ray.slope))

    # One sub-aperture pixel spans one micro lens; project the step from the
    # central lens to its neighbour back onto the virtual image plane.
    ray_o = object_ray(o, 0, state, config)
    ray_o1 = object_ray(o + 1, 0, state, config)
    n_o = -ray_o.slope * b_n_mm + positions[c]
    n_o1 = -ray_o1.slope * b_n_mm + positions[c]
    pitch_n = abs(n_o1 - n_o)

    return VirtualCameraArray(
        positions_mm=tuple(positions),
        tilt_angles_rad=tuple(tilts),
        entrance_pupil_to_h1_mm=z_pupil,
        virtual_image_distance_mm=b_n_mm,
        virtual_pixel_pitch_mm=pitch_n,
    )


@dataclass(frozen=True)
class TriangulationQuery:
    """A stereo pair selection and an observed disparity.

    Attributes:
        gap: Viewpoint separation G >= 1 between the paired views.
        disparity_px: Horizontal disparity in sub-aperture pixels; may be
            fractional and negative.
    """

    gap: int
    disparity_px: float

    def __post_init__(self) -> None:
        if self.gap < 1:
            raise ValueError(f"gap must be >= 1, got {self.gap}")
        if not math.isfinite(self.disparity_px):
            raise ValueError("disparity_px must be finite")


def _symmetric_pair(array: VirtualCameraArray, gap: int) -> tuple[int, int]:
    # Centred pair (-gap//2, gap - gap//2): always valid for gap <= 2c and
    # matches the adjacent-pair convention (0, 1) at gap 1.
    i = -(gap // 2)
    if gap > 2 * array.half_span:
        raise ValueError(
            f"gap {gap} exceeds the array's span of {2 * array.half_span}"
        )
    return i, i + gap


def baseline(array: VirtualCameraArray, i: int, gap: int) -> float:
    """Baseline B_G between viewpoints i and i + gap in mm.

    Equal spacing makes the result independent of i.
    """
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    return abs(array.position(i + gap) - array.position(i))


def relative_tilt(array: VirtualCameraArray, i: int, gap: int) -> float:
    """Magnitude of the axis angle between viewpoints i and i + gap, radians.

    Both cameras of a pair tilt toward each other whenever the camera
    focuses closer than infinity, so the relative angle is reported as a
    magnitude; it is zero exactly at infinity focus.
    """
    if gap < 0:
        raise ValueError(f"gap must be >= 0, got {gap}")
    return abs(array.tilt(i + gap) - array.tilt(i))


def triangulate(array: VirtualCameraArray, query: TriangulationQuery) -> float:
    """Object distance from the entrance pupil for an observed disparity.

    Uses the centred viewpoint pair spanning query.gap. Distances follow

        Z = b_n * B / (dx * p_n + b_n * tan(phi))

    with the pair's baseline B and relative tilt phi. The result does not
    depend on b_n because p_n scales with it.

    Returns:
        Z in mm; math.inf when the denominator vanishes (rays parallel); a
        negative value when the rays only intersect behind the cameras.
    """
    i_low, i_high = _symmetric_pair(array, query.gap)
    b = baseline(array, i_low, query.gap)
    phi = abs(array.tilt(i_high) - array.tilt(i_low))
    b_n = array.virtual_image_distance_mm
    denominator = query.disparity_px * array.virtual_pixel_pitch_mm + b_n * math.tan(
        phi
    )
    if denominator == 0:
        return INFINITY
    return b_n * b / denominator


def disparity_for_distance(
    array: VirtualCameraArray, gap: int, z_mm: float
) -> float:
    """Disparity in sub-aperture pixels for an object at distance z_mm.

    Inverse of triangulate over the same centred pair. Objects beyond the
    plane where the paired axes cross come out negative; an object exactly
    there maps to zero.
    """
    if z_mm == 0:
        raise ValueError("z_mm must be nonzero")
    i_low, i_high = _symmetric_pair(array, gap)
    b = baseline(array, i_low, gap)
    phi = abs(array.tilt(i_high) - array.tilt(i_low))
    b_n = array.virtual_image_distance_mm
    if math.isinf(z_mm):
        numerator = -b_n * math.tan(phi)
    else:
        numerator = b_n * b / z_mm - b_n * math.tan(phi)
    return numerator / array.virtual_pixel_pitch_mm


def measure_baseline(
    query: TriangulationQuery, z_mm: float, array: VirtualCameraArray
) -> float:
    """Baseline implied by observing disparity query.disparity_px at z_mm.

    Algebraic inversion of triangulate: feeding back a triangulated distance
    recovers the geometric baseline exactly.
    """
    if not z_mm > 0:
        raise ValueError(f"z_mm must be > 0, got {z_mm}")
    _, i_high = _symmetric_pair(array, query.gap)
    i_low = i_high - query.gap
    phi = abs(array.tilt(i_high) - array.tilt(i_low))
    b_n = array.virtual_image_distance_mm
    return (
        z_mm
        * (query.disparity_px * array.virtual_pixel_pitch_mm + b_n * math.tan(phi))
        / b_n
    )


def measure_tilt(
    query: TriangulationQuery,
    z_mm: float,
    baseline_mm: float,
    array: VirtualCameraArray,
) -> float:
    """Relative tilt implied by a distance, disparity, and known baseline.

    The second inversion of triangulate, solved for the tilt term.
    """
    if not z_mm > 0:
        raise ValueError(f"z_mm must be > 0, got {z_mm}")
    b_n = array.virtual_image_distance_mm
    return math.atan(
        baseline_mm / z_mm
        - query.disparity_px * array.virtual_pixel_pitch_mm / b_n
    )


def front_vertex_to_entrance_pupil(v1_h1_mm: float, a_h1_mm: float) -> float:
    """Entrance pupil position measured from the lens's front vertex.

    Args:
        v1_h1_mm: Front vertex to object-side principal plane distance.
        a_h1_mm: Signed pupil position from that plane, as returned by
            entrance_pupil_distance.
    """
    return v1_h1_mm + a_h1_mm
