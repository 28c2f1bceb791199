"""
NLS Lab Configuration
Centralized configuration management for the simulation lab
"""
import os
import logging
from dotenv import load_dotenv

# Load environment variables
SCRIPT_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
ENV_FILE = os.path.join(SCRIPT_DIR, ".env.lab")
if not os.path.exists(ENV_FILE):
    ENV_FILE = os.path.join(SCRIPT_DIR, ".env.local")
if not os.path.exists(ENV_FILE):
    ENV_FILE = os.path.join(SCRIPT_DIR, ".env")

load_dotenv(ENV_FILE)

# Output
OUTPUT_DIR = os.getenv("LAB_OUTPUT_DIR", "results")

# Worker pool (1 = run every ε in-process)
WORKERS = int(os.getenv("LAB_WORKERS", "1"))

# Numerics defaults
DEFAULT_DT = float(os.getenv("LAB_DT", "0.05"))
DEFAULT_SEED = int(os.getenv("LAB_SEED", "1234"))

# HTTP service
SERVER_HOST = os.getenv("LAB_SERVER_HOST", "127.0.0.1")
SERVER_PORT = int(os.getenv("LAB_SERVER_PORT", "8000"))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s %(levelname)-7s %(name)s: %(message)s"

_logging_ready = False


def get_logger(name: str) -> logging.Logger:
    """Module logger; the root handler is installed on first use."""
    global _logging_ready
    if not _logging_ready:
        logging.basicConfig(level=LOG_LEVEL.upper(), format=LOG_FORMAT)
        _logging_ready = True
    return logging.getLogger(f"nls_lab.{name}")


# Print configuration on import (for debugging)
if __name__ == "__main__":
    print("=== NLS Lab Configuration ===")
    print(f"Env file: {ENV_FILE}")
    print(f"Output dir: {OUTPUT_DIR}")
    print(f"Workers: {WORKERS}")
    print(f"Default dt: {DEFAULT_DT}")
    print(f"Default seed: {DEFAULT_SEED}")
    print(f"Server: http://{SERVER_HOST}:{SERVER_PORT}")
    print(f"Log level: {LOG_LEVEL}")
