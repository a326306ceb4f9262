"""Lion-and-man pursuit games: spaces, strategies, play engine, minimax solver."""
