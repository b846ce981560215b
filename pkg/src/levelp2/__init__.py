"""Level p^2 quaternion orders, Brandt modules, weight 3/2 theta series and central-value identities."""

__version__ = "0.1.0"

from .errors import Level2Error  # noqa: E402
from .orders_p2 import LevelP2Context, build_context, build_context_from_K  # noqa: E402
from .ideals import ClassList, LeftIdeal, enumerate_classes  # noqa: E402
from .hecke_ops import BilateralGroup, HeckeData, bilateral_group  # noqa: E402
from .quadfield import FieldK  # noqa: E402

__all__ = [
    "__version__",
    "Level2Error",
    "LevelP2Context",
    "build_context",
    "build_context_from_K",
    "ClassList",
    "LeftIdeal",
    "enumerate_classes",
    "BilateralGroup",
    "HeckeData",
    "bilateral_group",
    "FieldK",
]
