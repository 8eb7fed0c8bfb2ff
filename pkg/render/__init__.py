from .camera import Camera, camera_ray, project
from .raycast import FrameBundle, PreviousFrame, RayCaster, ShadingModel, quantize, ramp_checker, render
from .export import load_bundle, load_ppm, load_raster, mask_to_image, save_bundle, save_ppm, save_raster
