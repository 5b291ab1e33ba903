"""Virtual camera model of a standard plenoptic camera.

A camera with a micro lens array one focal length in front of the sensor
behaves like a row of small cameras sitting on the main lens's entrance
pupil. This package computes that equivalent array from the optical
parameters: viewpoint positions, baselines, axis tilts, and the distances
a disparity between two viewpoints triangulates to. Around the model sit
the tools to use it: raw capture decoding into per-viewpoint images, block
matching, an independent ray-trace check, and a synthetic scene renderer.
"""

__version__ = "0.1.0"

from .configio import ConfigError, load_config, parse_config
from .disparity import (
    DisparityMap,
    MatchParams,
    block_match,
    read_map_csv,
    sad_cost,
    subpixel_refine,
    to_graymap,
    write_map_csv,
)
from .lightfield import (
    LightField4D,
    RawLightFieldImage,
    SubApertureImage,
    decode,
    extract_all_views,
    extract_view,
    flatten,
    index_invert,
    index_translate,
    read_pgm,
    view_filename,
    write_pgm,
)
from .optics import (
    INFINITY,
    CameraConfig,
    FocusSetting,
    FocusState,
    MainLensSpec,
    MicroLensSpec,
    SensorSpec,
    derive_focus_state,
    exit_pupil_at_focus,
    mla_cardinal_points,
    solve_image_distance,
)
from .oracle import (
    Refraction,
    ScenePlane,
    TracedRay,
    Translation,
    VirtualCameraSimulation,
    mla_surface_elements,
    parse_scene,
    render_synthetic_scene,
    simulate_distance,
    simulate_virtual_cameras,
    trace,
)
from .presets import (
    REFERENCE_VALUES,
    CheckOutcome,
    ReferenceCheck,
    fixture_names,
    fixture_path,
    load_fixture,
    run_consistency_checks,
    run_factory_checks,
)
from .raymodel import (
    ChiefRay,
    ReferencePlane,
    StereoRig,
    TriangulationQuery,
    VirtualCameraArray,
    baseline,
    build_virtual_camera_array,
    chief_slope,
    convergence_distance,
    disparity_for_distance,
    entrance_pupil_distance,
    exit_pupil_baseline,
    front_vertex_to_entrance_pupil,
    measure_baseline,
    measure_tilt,
    mic_position,
    micro_image_sample,
    micro_lens_height,
    object_ray,
    relative_tilt,
    stereo_depth,
    triangulate,
)

__all__ = [
    "__version__",
    "INFINITY",
    "CameraConfig",
    "ChiefRay",
    "CheckOutcome",
    "ConfigError",
    "DisparityMap",
    "FocusSetting",
    "FocusState",
    "LightField4D",
    "MainLensSpec",
    "MatchParams",
    "MicroLensSpec",
    "RawLightFieldImage",
    "REFERENCE_VALUES",
    "ReferenceCheck",
    "ReferencePlane",
    "Refraction",
    "ScenePlane",
    "SensorSpec",
    "StereoRig",
    "SubApertureImage",
    "TracedRay",
    "Translation",
    "TriangulationQuery",
    "VirtualCameraArray",
    "VirtualCameraSimulation",
    "baseline",
    "block_match",
    "build_virtual_camera_array",
    "chief_slope",
    "convergence_distance",
    "decode",
    "derive_focus_state",
    "disparity_for_distance",
    "entrance_pupil_distance",
    "exit_pupil_at_focus",
    "exit_pupil_baseline",
    "extract_all_views",
    "extract_view",
    "fixture_names",
    "fixture_path",
    "flatten",
    "front_vertex_to_entrance_pupil",
    "index_invert",
    "index_translate",
    "load_config",
    "load_fixture",
    "measure_baseline",
    "measure_tilt",
    "mic_position",
    "micro_image_sample",
    "micro_lens_height",
    "mla_cardinal_points",
    "mla_surface_elements",
    "object_ray",
    "parse_config",
    "parse_scene",
    "read_map_csv",
    "read_pgm",
    "relative_tilt",
    "render_synthetic_scene",
    "run_consistency_checks",
    "run_factory_checks",
    "sad_cost",
    "simulate_distance",
    "simulate_virtual_cameras",
    "solve_image_distance",
    "stereo_depth",
    "subpixel_refine",
    "to_graymap",
    "trace",
    "triangulate",
    "view_filename",
    "write_map_csv",
    "write_pgm",
]
