from .avgmeter import AverageMeter
from .recorder import Recorder
from .hashing import config_hash, fnv1a_64, stable_json
