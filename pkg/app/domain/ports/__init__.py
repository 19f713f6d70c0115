"""Ports - Abstractions/Contracts for external services"""
from .activity_log_source import IActivityLogSource
from .report_store import IReportStore

__all__ = ["IActivityLogSource", "IReportStore"]
