from .rig import (ANCHORS, DIRECTIONS, DIRECTION_YAW, CockpitConfig, CockpitRig, FramePanel,
                  frame_angular_extents, make_cockpit_rig)
from .compose import capture_views, compose, frame_region_mask, sample_bilinear
