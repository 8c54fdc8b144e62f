"""Persistent cache of finished estimate audits, keyed by config hash."""

import json
import os
from datetime import datetime, timedelta
from typing import Dict, List, Optional

from src.config import AUDIT_CACHE_FILE, AUDIT_CACHE_SCHEMA_VERSION, SAVE_INTERVAL_SECONDS, logger
from src.models import EstimateAudit


class AuditCache:
    """JSON-backed store of EstimateAudit records for one configuration.

    A file written for a different config hash or schema version is ignored
    and replaced.
    """

    def __init__(self, config_key: str, cache_file: str = AUDIT_CACHE_FILE):
        self._config_key = config_key
        self._cache_file = cache_file
        self._temp_file = f"{cache_file}.tmp"
        self._cache: Dict[str, Dict] = {}
        self._last_save: Optional[datetime] = datetime.now()
        self._modified = False
        self._load()

    def _save(self, force: bool = False) -> None:
        """Write the audits to disk once modified and the save interval has passed."""
        if not (self._modified or force):
            return

        if not force and self._last_save and datetime.now() - self._last_save < timedelta(seconds=SAVE_INTERVAL_SECONDS):
            return

        try:
            data = {
                'timestamp': datetime.now().isoformat(),
                'schema_version': AUDIT_CACHE_SCHEMA_VERSION,
                'cache_key': self._config_key,
                'audits': self._cache,
            }

            with open(self._temp_file, 'w') as f:
                json.dump(data, f, sort_keys=True)

            # atomic on POSIX and Windows
            os.replace(self._temp_file, self._cache_file)

            self._last_save = datetime.now()
            self._modified = False
            logger.info(f"Saved audit cache with {len(self._cache)} audits")

        except OSError as e:
            logger.error(f"Failed to save audit cache: {e}")
            # no partial cache file is left behind
            try:
                os.remove(self._temp_file)
            except OSError:
                pass

    def _load(self) -> None:
        """Read audits stored by an earlier run with the same config hash."""
        try:
            if os.path.exists(self._cache_file):
                with open(self._cache_file, 'r') as f:
                    data = json.load(f)

                if (data.get('cache_key') != self._config_key
                        or data.get('schema_version') != AUDIT_CACHE_SCHEMA_VERSION):
                    logger.info("Audit cache key mismatch, starting fresh")
                    self._cache = {}
                    self._last_save = None
                    self._save(force=True)
                    return

                self._cache = data.get('audits', {})
                self._last_save = datetime.fromisoformat(data.get('timestamp', datetime.now().isoformat()))
        except (OSError, ValueError) as e:
            logger.error(f"Failed to load audit cache: {e}")
            self._cache = {}
            self._last_save = None

    def get(self, key: str) -> Optional[EstimateAudit]:
        """Retrieve a finished audit."""
        entry = self._cache.get(key)
        return EstimateAudit.from_dict(entry['audit']) if entry is not None else None

    def get_samples(self, key: str) -> Optional[List[Dict]]:
        """Retrieve the per-level samples stored with an audit, if any."""
        entry = self._cache.get(key)
        return entry.get('samples') if entry is not None else None

    def set(self, key: str, audit: EstimateAudit, samples: Optional[List[Dict]] = None) -> None:
        """Store a finished audit, optionally with the samples it was built from."""
        self._cache[key] = {'audit': audit.to_dict(), 'samples': samples}
        self._modified = True
        self._save()

    def keys(self) -> List[str]:
        return sorted(self._cache)

    def clear(self) -> None:
        """Clear all audits."""
        self._cache.clear()
        self._modified = True
        self._save(force=True)

    def __len__(self) -> int:
        return len(self._cache)

    def __enter__(self):
        """Open the cache for a run."""
        return self

    def __exit__(self, *_):
        """Flush pending audits."""
        if self._modified:
            self._save(force=True)
