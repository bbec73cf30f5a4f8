# Qubit-Cavity Tests Package
