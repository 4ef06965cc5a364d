from multiprocessing import Process
from typing import List


def _winnow_process_list(
        process_list: List[Process]) -> List[Process]:
    """
    Drop every process that has exited from process_list
    and return what is left (still running or not started).

    Parameters
    ----------
    process_list: List[multiprocessing.Process]

    Returns
    -------
    process_list: List[multiprocessing.Process]
    """
    return [p for p in process_list if p.exitcode is None]


def round_robin(items, n_chunks):
    """
    Deal items into n_chunks lists, item ii going to chunk ii % n_chunks.
    Empty chunks are dropped.
    """
    sub_lists = []
    for ii in range(n_chunks):
        sub_lists.append([])
    for ii in range(len(items)):
        sub_lists[ii % n_chunks].append(items[ii])
    return [s for s in sub_lists if len(s) > 0]
