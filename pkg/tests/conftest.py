"""Shared fixtures and sys.path setup so tests can import the oracles
module that lives next to them."""

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))
