"""Export Keras model predictions as record files.

The analysis side never sees a model; it reads record files. This
package is the producer: it runs a saved model over stored inputs in one
of three modes (point, MC-dropout sampled, ensemble) and writes the
version-1 record format documented in FORMAT.md.
"""

from .spec import SPLITS, ExportError, ExportSpec
from .export import (SUM_TOLERANCE, export_ensemble, export_point,
                     export_sampled, load_model)
from .writer import FORMAT_VERSION, write_classification_records

__version__ = "0.1.0"

__all__ = [
    "SPLITS",
    "ExportError",
    "ExportSpec",
    "SUM_TOLERANCE",
    "export_ensemble",
    "export_point",
    "export_sampled",
    "load_model",
    "FORMAT_VERSION",
    "write_classification_records",
    "__version__",
]
