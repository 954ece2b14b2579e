"""
Pipeline Package
Stage orchestration for the behavioural scoring pipeline
"""

from pipeline.runner import PipelineRunner

__all__ = ['PipelineRunner']
