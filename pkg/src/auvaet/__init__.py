"""AUV acoustic energy transfer and age-of-information trajectory learning."""
__version__ = "0.1.0"

from .acoustics import AcousticConfig, AttenuationMode
from .env import Action, AuvEnv, EnvConfig, GridSpec, Mode, Penalties, jain_index
from .uplink import UplinkConfig

__all__ = [
    "AcousticConfig",
    "Action",
    "AttenuationMode",
    "AuvEnv",
    "EnvConfig",
    "GridSpec",
    "Mode",
    "Penalties",
    "UplinkConfig",
    "jain_index",
]
