from . import tools
from . import metrics
