"""
Interfaces for the fuzzy geometry lab following SOLID principles.
This module defines abstract base classes for models, verification suites, k schedules and report writers.
"""

from abc import ABC, abstractmethod
from typing import Any, Dict

import pandas as pd


class OperatorModelInterface(ABC):
    """Interface for a truncated model carrying named operators."""

    @abstractmethod
    def operators(self) -> Dict[str, Any]:
        """Return the named operators of the model."""
        pass

    @abstractmethod
    def describe(self) -> Dict[str, Any]:
        """Return the model parameters for report headers."""
        pass


class VerificationSuiteInterface(ABC):
    """Interface for identity verification suites."""

    @abstractmethod
    def verify(self, model: Any) -> Any:
        """Run every check of the suite and return a verification report."""
        pass


class KScheduleInterface(ABC):
    """Interface for k(Lambda) schedules."""

    @property
    @abstractmethod
    def name(self) -> str:
        """Schedule label used in reports."""
        pass

    @abstractmethod
    def __call__(self, cutoff: int) -> float:
        """Return k for the given cutoff."""
        pass


class ReportWriterInterface(ABC):
    """Interface for report output operations."""

    @abstractmethod
    def write(self, data: pd.DataFrame, **kwargs) -> bool:
        """Write a result table to a destination."""
        pass
