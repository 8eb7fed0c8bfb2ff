from .geometry import IDENTITY, Pose, euler_matrix, matrix_to_euler, normalize, vec3, wrap_angle, yaw_matrix
from .entities import (DEFAULT_LIGHT_DIR, PANEL_ID_BASE, Box, Entity, GroundPlane, Hit, Quad, Role, Scene, Sphere,
                       intersect_entity, intersect_quad, query_ray)
from .builders import (ArenaSpec, Centerline, TrackSpec, build_fps_scene, build_racing_scene,
                       centerline_from_segments, default_arena_spec, default_track_spec)
