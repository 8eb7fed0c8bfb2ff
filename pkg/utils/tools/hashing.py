# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json

FNV64_OFFSET = 0xcbf29ce484222325
FNV64_PRIME = 0x100000001b3
MASK64 = 0xFFFFFFFFFFFFFFFF


def fnv1a_64(data: bytes):
    h = FNV64_OFFSET
    for byte in data:
        h ^= byte
        h = (h * FNV64_PRIME) & MASK64
    return h


def stable_json(mapping):
    return json.dumps(mapping, sort_keys=True, separators=(',', ':'))


def config_hash(mapping, exclude=()):
    '''Hex FNV-1a of the canonical JSON of `mapping` without the `exclude` top-level keys.'''
    kept = {k: v for k, v in mapping.items() if k not in exclude}
    return '{:016x}'.format(fnv1a_64(stable_json(kept).encode('utf-8')))
