# Qubit-Cavity Source Package
