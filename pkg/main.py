#!/usr/bin/env python3
"""
NXT Agent Harness - launcher.
Runs AgentSpeak agents against simulated Lego NXT robots; see `python main.py --help`.
"""

import sys
from pathlib import Path

# Add project root to path for imports
sys.path.insert(0, str(Path(__file__).parent))

from src.cli.main import main

if __name__ == "__main__":
    sys.exit(main())
