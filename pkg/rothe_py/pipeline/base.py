"""Core abstract base classes for rothe_py computations."""
from __future__ import annotations

from abc import ABC, abstractmethod
from typing import Generic, Optional, TypeVar

InputT = TypeVar("InputT")
ResultT = TypeVar("ResultT")


class Operator(ABC, Generic[InputT, ResultT]):
    """Unit of computation that consumes an input and keeps its latest result."""

    def __init__(self) -> None:
        self._results: Optional[ResultT] = None

    @abstractmethod
    def process(self, data: InputT) -> ResultT:
        """Consume ``data`` and persist the operator's result."""

    def get_results(self) -> ResultT:
        """Return the result of the most recent :meth:`process` call."""
        if self._results is None:
            raise RuntimeError("Operator results are not available. Call process() before get_results().")
        return self._results


__all__ = ["Operator"]
