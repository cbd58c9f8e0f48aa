"""raywave - Storage Layer"""

from src.infrastructure.storage.fieldio import FieldStore, read_field, write_field

__all__ = ["FieldStore", "read_field", "write_field"]
