# This file can be empty - it's just to make the tests directory a Python package