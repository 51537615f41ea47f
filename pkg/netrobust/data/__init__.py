# Data module
from .storage import read_edge_list, write_edge_list, read_weighted_sample, write_result_csv
