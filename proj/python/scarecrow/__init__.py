"""Python bindings for the scarecrow detection and monitoring core."""

from ._scarecrow import *  # noqa: F401,F403
from ._scarecrow import __version__, run_command  # noqa: F401
