"""Syzygies of P1 x P1 under Segre-Veronese embeddings, computed by linear algebra over a finite field."""

__version__ = "0.1.0"
