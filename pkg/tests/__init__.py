# Empty file to make tests directory a Python package
