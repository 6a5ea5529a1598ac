import datetime
import json
from pathlib import Path
from typing import Optional


class RunLogger:
    def __init__(self, run_id: str, log_dir: Optional[Path] = None):
        self.run_id = run_id
        root = Path(log_dir) if log_dir is not None else Path('logs')
        self.date_dir = root / 'app' / datetime.date.today().isoformat()
        self.date_dir.mkdir(parents=True, exist_ok=True)
        self.run_dir = root / 'runs' / run_id
        self.run_dir.mkdir(parents=True, exist_ok=True)

    @property
    def steps_path(self) -> Path:
        return self.run_dir / 'steps.log'

    def event(self, phase: str, payload: Optional[dict] = None):
        record = {
            'ts': datetime.datetime.now(datetime.timezone.utc).replace(tzinfo=None).isoformat() + 'Z',
            'run_id': self.run_id,
            'phase': phase,
            **(payload or {})
        }
        line = json.dumps(record, ensure_ascii=False, default=str)
        with (self.date_dir / 'app.log').open('a', encoding='utf-8') as fh:
            fh.write(line + '\n')
        with self.steps_path.open('a', encoding='utf-8') as fh:
            fh.write(line + '\n')


def get_logger(run_id: str, log_dir: Optional[Path] = None) -> RunLogger:
    if log_dir is None:
        from config.settings import load_settings
        log_dir = load_settings().log_dir
    return RunLogger(run_id, log_dir)
