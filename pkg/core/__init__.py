# Core numerics: windows, lattice, frames, transforms and space norms
