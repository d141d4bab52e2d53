import os
import sys

# the CMake-built extension directory comes first; installed packages work too
_mod_dir = os.environ.get("LFT_MODULE_DIR")
if _mod_dir:
    sys.path.insert(0, _mod_dir)
_repo_python = os.path.join(os.path.dirname(__file__), "..", "..", "python")
sys.path.insert(1, os.path.abspath(_repo_python))
