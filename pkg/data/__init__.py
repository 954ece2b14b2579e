"""
Data Package
Account profiles, file ingestion, validation, splitting and synthetic portfolios
"""

from data.data_splitter import data_splitter
from data.data_validator import data_validator
from data.file_processor import file_processor
from data.synthetic_generator import synthetic_generator

__all__ = ['data_splitter', 'data_validator', 'file_processor', 'synthetic_generator']
