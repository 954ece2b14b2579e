"""
Reports Package
Artifact writing, cluster profiling and workbook export
"""

from reports.cluster_profiler import cluster_profiler
from reports.excel_exporter import excel_exporter
from reports.report_generator import report_generator

__all__ = ['report_generator', 'cluster_profiler', 'excel_exporter']
