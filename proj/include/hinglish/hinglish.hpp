#pragma once

#include "hinglish/abtest.hpp"
#include "hinglish/client.hpp"
#include "hinglish/clock.hpp"
#include "hinglish/config.hpp"
#include "hinglish/corpus.hpp"
#include "hinglish/error.hpp"
#include "hinglish/genpipe.hpp"
#include "hinglish/judge.hpp"
#include "hinglish/langid.hpp"
#include "hinglish/metrics.hpp"
#include "hinglish/mock.hpp"
#include "hinglish/normalize.hpp"
#include "hinglish/semsim.hpp"
#include "hinglish/text.hpp"
