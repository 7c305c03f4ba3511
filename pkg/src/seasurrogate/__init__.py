"""Wave-to-motion surrogate modelling toolkit.

Synthesizes irregular seas, generates reference vessel-motion records
with a desk-scale nonlinear roll model, trains recurrent surrogates on
causal wave stencils, and evaluates distribution fidelity with an
emphasis on extreme-response tails.
"""

__version__ = "0.1.0"
