from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List
import json

import jsonschema

MANIFEST_SCHEMA_VERSION = '1.0'

RUN_MANIFEST_JSON_SCHEMA = {
  '$schema': 'https://json-schema.org/draft/2020-12/schema',
  'title': 'Smooshlab Run Manifest',
  'type': 'object',
  'properties': {
    'schema_version': {'type': 'string', 'const': MANIFEST_SCHEMA_VERSION},
    'run_id': {'type': 'string'},
    'command': {'type': 'string'},
    'code_version': {'type': 'string'},
    'created_at': {'type': 'string', 'format': 'date-time'},
    'status': {'type': 'string', 'enum': ['success', 'partial', 'error']},
    'config': {'type': 'object'},
    'seed': {'type': 'integer', 'minimum': 0},
    'replicas': {'type': 'integer', 'minimum': 0},
    'replica_seeds': {'type': 'array', 'items': {'type': 'integer', 'minimum': 0}},
    'wall_clock_s': {'type': 'number', 'minimum': 0},
    'workers': {'type': 'integer', 'minimum': 1},
    'artifacts': {
      'type': 'array',
      'items': {
        'type': 'object',
        'properties': {
          'kind': {'type': 'string'},
          'path': {'type': 'string'},
          'sha256': {'type': 'string', 'pattern': '^[0-9a-f]{64}$'},
          'rows': {'type': 'integer', 'minimum': 0}
        },
        'required': ['kind', 'path', 'sha256', 'rows']
      }
    },
    'failures': {
      'type': 'array',
      'items': {
        'type': 'object',
        'properties': {
          'replica': {'type': 'integer', 'minimum': 0},
          'error': {'type': 'string'}
        },
        'required': ['replica', 'error']
      }
    }
  },
  'required': ['schema_version', 'run_id', 'code_version', 'created_at', 'status', 'config',
               'seed', 'replicas', 'replica_seeds', 'wall_clock_s', 'artifacts', 'failures']
}


@dataclass
class RunManifest:
    run_id: str
    command: str
    code_version: str
    created_at: str
    status: str
    config: Dict[str, Any]
    seed: int
    replicas: int
    replica_seeds: List[int]
    wall_clock_s: float
    workers: int = 1
    artifacts: List[Dict[str, Any]] = field(default_factory=list)
    failures: List[Dict[str, Any]] = field(default_factory=list)
    schema_version: str = MANIFEST_SCHEMA_VERSION

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + '\n'

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'RunManifest':
        validate_manifest(data)
        return cls(**data)


def validate_manifest(data: Dict[str, Any]) -> None:
    """Raise jsonschema.ValidationError if data is not a valid manifest."""
    jsonschema.validate(instance=data, schema=RUN_MANIFEST_JSON_SCHEMA)
