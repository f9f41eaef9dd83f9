"""Tasks, training loop, checkpoints, probes and the command line."""
