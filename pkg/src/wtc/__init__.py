"""wtc: an exact engine for the calculus of total Witt groups.

Layers, bottom to top:

- ``abelian`` / ``f2``: exact presentations of finitely generated abelian
  groups and F2 vector spaces (Smith normal form, kernels, cokernels).
- ``schemes`` / ``align``: symbolic schemes with Picard and unit data, and
  the groupoid of quadratic alignment classes between line bundles.
- ``descent``: certification of base-compatibility conditions and the
  constructive descent of alignments along morphisms.
- ``expr``: formal words of Witt-group morphisms (per/lbi/alis/pull/push/
  ext/restrict/bord) with a terminating, order-independent normalizer.
- ``module``: exact presentations of total Witt groups as graded modules
  over a base Witt ring, transports and the lax product.
- ``basis``: total-basis verification via theta maps, basis surgery,
  transfer along morphisms and localization ledgers.
- ``workspace`` / ``cli``: JSON workspace format and the ``wtc`` driver.
"""

__version__ = "0.1.0"
