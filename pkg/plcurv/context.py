"""RunContext carrying the run_id that tags every log record of one invocation"""

from contextvars import ContextVar
from datetime import datetime, timezone
from typing import Any, Dict, Optional
import secrets

_run_context: ContextVar[Optional['RunContext']] = ContextVar('plcurv_run_context', default=None)


class RunContext:
    """
    Identity of one library or CLI invocation.

    A CLI command opens one context; everything logged while it is active
    (flips, Newton steps, scan progress) carries the same run_id.

    Example:
        ```python
        with RunContext(metadata={'command': 'uniformize'}) as run:
            result = uniformize(surface, metric)
        ```
    """

    def __init__(self, run_id: Optional[str] = None, metadata: Optional[Dict[str, Any]] = None):
        self.run_id = run_id or self._generate_run_id()
        self.metadata = metadata or {}
        self._token = None

    @staticmethod
    def _generate_run_id() -> str:
        """Format: run_{UTC timestamp}_{random hex}"""
        timestamp = datetime.now(timezone.utc).strftime('%Y%m%d%H%M%S')
        return f'run_{timestamp}_{secrets.token_hex(4)}'

    @classmethod
    def get_current(cls) -> 'RunContext':
        """Current context, created lazily on first use"""
        ctx = _run_context.get()
        if ctx is None:
            ctx = cls()
            _run_context.set(ctx)
        return ctx

    def set_metadata(self, key: str, value: Any):
        self.metadata[key] = value

    def __enter__(self) -> 'RunContext':
        self._token = _run_context.set(self)
        return self

    def __exit__(self, *args):
        if self._token is not None:
            _run_context.reset(self._token)
            self._token = None

    def __repr__(self):
        return f'RunContext(run_id={self.run_id})'


def get_run_id() -> str:
    """Run id of the active context"""
    return RunContext.get_current().run_id
