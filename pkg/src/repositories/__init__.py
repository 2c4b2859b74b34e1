from .database import DatabaseConfig, db_config
from .arquivos import (
    ingest_csv,
    write_json,
    write_series_csv,
    write_path_csv,
    export_paths_csv,
    write_frame_csv,
    write_histogram_csv,
    write_records_csv
)

__all__ = [
    'DatabaseConfig',
    'db_config',
    'ingest_csv',
    'write_json',
    'write_series_csv',
    'write_path_csv',
    'export_paths_csv',
    'write_frame_csv',
    'write_histogram_csv',
    'write_records_csv'
]
