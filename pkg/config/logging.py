"""
Logging Configuration
"""

from config import settings

logging_config = {
    "level": settings.LOG_LEVEL,
    "to_file": settings.LOG_TO_FILE,
    "directory": settings.LOG_DIR,
    "max_size": settings.LOG_MAX_SIZE,
    "backup_count": settings.LOG_BACKUP_COUNT,
    "format": "[%(asctime)s] %(name)s.%(levelname)s: %(message)s",
    "date_format": "%Y-%m-%d %H:%M:%S",
}
