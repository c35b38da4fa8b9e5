"""
hmamba - Main Entry Point

Hierarchical pronunciation assessment and mispronunciation diagnosis toolkit.
"""

import sys
from pathlib import Path

# Add src directory to Python path
src_path = Path(__file__).parent
sys.path.insert(0, str(src_path))


def main() -> int:
    """Main entry point for hmamba"""
    from core.application_controller import run_application

    return run_application(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
