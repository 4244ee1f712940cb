# MIT License

# Copyright (c) 2026 The popranking authors

# Permission is hereby granted, free of charge, to any person obtaining a copy
# of this software and associated documentation files (the "Software"), to deal
# in the Software without restriction, including without limitation the rights
# to use, copy, modify, merge, publish, distribute, sublicense, and/or sell
# copies of the Software, and to permit persons to whom the Software is
# furnished to do so, subject to the following conditions:

# The above copyright notice and this permission notice shall be included in all
# copies or substantial portions of the Software.

# THE SOFTWARE IS PROVIDED "AS IS", WITHOUT WARRANTY OF ANY KIND, EXPRESS OR
# IMPLIED, INCLUDING BUT NOT LIMITED TO THE WARRANTIES OF MERCHANTABILITY,
# FITNESS FOR A PARTICULAR PURPOSE AND NONINFRINGEMENT. IN NO EVENT SHALL THE
# AUTHORS OR COPYRIGHT HOLDERS BE LIABLE FOR ANY CLAIM, DAMAGES OR OTHER
# LIABILITY, WHETHER IN AN ACTION OF CONTRACT, TORT OR OTHERWISE, ARISING FROM,
# OUT OF OR IN CONNECTION WITH THE SOFTWARE OR THE USE OR OTHER DEALINGS IN THE
# SOFTWARE.

from __future__ import annotations

import getpass
import logging
from pathlib import Path

import yaml

from .models import Settings
from .models.settings import SCHEMA_PATH

LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"


class Application:
    """
    Owns the settings of one command line run and the services around it:
    logging and error reporting.
    """

    def __init__(
        self,
        user_file: str | Path | None = None,
        overrides: dict | None = None,
        log_level: str | None = None,
    ):
        self.setup_logging(log_level or "INFO")
        self.logger = logging.getLogger(__name__)
        self.settings = Settings(user_file, overrides)
        if log_level is None:
            logging.getLogger().setLevel(self.settings.log_level.upper())

        schema = yaml.safe_load(SCHEMA_PATH.read_text())
        self.display_name = schema.get("display_name", "popranking")

    @property
    def version(self) -> str:
        from . import __version__

        return __version__

    @staticmethod
    def setup_logging(level: str):
        logging.basicConfig(format=LOG_FORMAT, level=level.upper(), force=True)

    def setup_sentry(self):
        """
        Add Sentry error handling.
        """
        try:
            import sentry_sdk

            dsn = self.settings.sentry_dsn
            if dsn is None or dsn == "":
                self.logger.error("Setting up Sentry failed. No DSN provided")
                return

            environment = "production"
            version = self.version
            if version == "0.0.0+dev":
                environment = "development"

            sentry_sdk.set_user({"id": getpass.getuser()})

            sentry_sdk.set_context(
                "app",
                {
                    "app_name": self.display_name,
                    "app_version": version,
                },
            )

            sentry_sdk.set_tags(
                {
                    "model.params": self.settings.model_params.hash(),
                    "model.signal_model": self.settings.signal_model,
                }
            )

            sentry_sdk.init(
                dsn=dsn,
                attach_stacktrace=True,
                include_source_context=True,
                before_send=before_send,
                release=version,
                environment=environment,
            )

            self.logger.info("Successfully setup Sentry.")
        except Exception:
            self.logger.error("Setting up Sentry failed.")


def before_send(event, hint):
    """Drop events whose stack never passes through this package."""
    paths = []
    for value in event.get("exception", {}).get("values", []):
        for frame in (value.get("stacktrace") or {}).get("frames", []):
            if frame.get("abs_path"):
                paths.append(Path(frame["abs_path"]).parent.as_posix())

    base_path = Path(__file__).parent.as_posix()

    if not any(base_path in path for path in paths):
        return None

    return event
