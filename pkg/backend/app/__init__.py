# tvcount library: count time-series models, sampler and evaluation
