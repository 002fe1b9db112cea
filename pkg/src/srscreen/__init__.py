"""Document screening toolkit for systematic literature reviews.

Three classifiers over titles and abstracts: a Boolean keyword query, a
random forest on 15 semantic-cluster TF-IDF features, and the same forest
with the top-N tokens by absolute t-statistic added.  Includes stratified
cross-validated evaluation (ROC/PR/AUC), workload-reduction reporting,
training-size sensitivity sweeps, and a label-disagreement audit.
"""

__version__ = "0.1.0"
