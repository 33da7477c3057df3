import os
import sys

import hypothesis

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

hypothesis.settings.register_profile("ci", max_examples=50, deadline=None)
hypothesis.settings.load_profile("ci")
