#pragma once

#define BCT_VERSION "0.1.0"
