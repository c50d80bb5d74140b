import json
import logging
import os
from typing import Any, Dict

logger = logging.getLogger(__name__)


def import_json_file(file_path: str) -> Dict[str, Any]:
    """Liest ein JSON-Dokument (Konfiguration oder Checkpoint)."""
    if not os.path.isfile(file_path):
        message = f"JSON-Datei nicht gefunden: {file_path}"
        logger.error(message)
        raise FileNotFoundError(message)
    logger.info(f"Lese JSON-Datei {file_path}")
    try:
        with open(file_path, 'r', encoding='utf-8') as file:
            return json.load(file)
    except json.JSONDecodeError as e:
        logger.error(f"Ungültiges JSON in {file_path}: {e}")
        raise
    except OSError as e:
        logger.error(f"JSON-Datei {file_path} konnte nicht gelesen werden: {e}")
        raise


def export_json_file(file_path: str, data: Dict[str, Any]) -> None:
    """Schreibt ein JSON-Dokument; Floats im kürzesten repr, damit das Einlesen bit-exakt ist."""
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, 'w', encoding='utf-8') as file:
        json.dump(data, file, indent=2, ensure_ascii=False, allow_nan=True)
        file.write("\n")
    logger.debug(f"JSON geschrieben: {file_path}")
