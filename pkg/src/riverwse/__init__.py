"""riverwse: river water surface elevation estimation from UAV
photogrammetric DSMs and orthophotos."""

from . import dataset, errors, lineref, metrics, pipeline, raster, regress, smoothing

__all__ = ["dataset", "errors", "lineref", "metrics", "pipeline", "raster",
           "regress", "smoothing"]
__version__ = "0.1.0"
