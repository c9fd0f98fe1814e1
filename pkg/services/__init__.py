# -*- coding: utf-8 -*-
"""
服务模块

Dens-PU 流水线各阶段：数据集、自编码器、嵌入增强、异常检测、反例选择、分类器、评估指标
"""
