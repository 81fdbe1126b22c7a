import asyncio
import json
import sys
from typing import Any, Dict, Optional

from utils.errors import InvalidParameter
from utils.logger import logger
from .provider_base import SpecProvider


class JsonProvider(SpecProvider):
    """
    Reads a JSON input document from a file, or from stdin when the path is "-".
    The document is read once and cached.
    """

    def __init__(self, path: str):
        self.path = path
        self._doc: Optional[Dict[str, Any]] = None

    @property
    def source(self) -> str:
        return "stdin" if self.path == "-" else self.path

    def _read(self) -> str:
        if self.path == "-":
            return sys.stdin.read()
        with open(self.path, "r", encoding="utf-8") as fh:
            return fh.read()

    async def get_document(self) -> Dict[str, Any]:
        if self._doc is not None:
            return self._doc
        try:
            # Blocking file IO in a worker thread
            text = await asyncio.to_thread(self._read)
        except OSError as e:
            raise InvalidParameter(f"Cannot read input {self.source}: {e}")
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as e:
            raise InvalidParameter(f"Malformed JSON in {self.source}: {e}")
        if not isinstance(doc, dict):
            raise InvalidParameter(f"Input {self.source} must be a JSON object")
        logger.info(f"Loaded input document from {self.source}")
        self._doc = doc
        return doc
