"""Software twin of a LoRaWAN littoral water-quality monitoring buoy fleet.

The package covers the full loop: duty-cycled node firmware with relay-switched
sensor power rails, CayenneLPP payload encoding, Class-A uplink/downlink over a
gateway with disc coverage, a cloud ingest pipeline with topic routing and a
time-series store, an energy/endurance model, and an HTTP service exposing the
whole thing to an operator console.
"""

__version__ = "0.1.0"
