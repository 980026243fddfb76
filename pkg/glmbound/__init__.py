import glmbound.bound
import glmbound.design
import glmbound.estimate
import glmbound.families
import glmbound.risk
import glmbound.verify
from glmbound.version import __version__
