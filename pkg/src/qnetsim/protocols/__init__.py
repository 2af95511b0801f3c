"""Entanglement generation, purification and swapping state machines."""


def __getattr__(name):
    # resolved lazily: the protocol modules import the resource manager,
    # which itself imports the wire records from this package
    if name == "RESPONDERS":
        from .purification import respond as purification_respond
        from .swapping import respond as swapping_respond

        table = {"purification": purification_respond, "swapping": swapping_respond}
        globals()["RESPONDERS"] = table
        return table
    raise AttributeError(name)
