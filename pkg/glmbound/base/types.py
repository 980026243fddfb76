from typing import Literal

#:
FamilyName = Literal['gaussian', 'bernoulli', 'poisson']
#:
PriorCase = Literal[
    'rank_deficient', 'case1', 'case2_bulk', 'case2_single', 'single_large'
]
#:
EstimatorKind = Literal['linear_mle', 'irls_mle', 'zero']
#:
VerificationSuite = Literal['lemma1', 'lemma2', 'chain']
#:
GridLevel = Literal['coarse', 'fine']
